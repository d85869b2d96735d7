//! Liftings of base functors to relations, and the coinductive fixpoints
//! they generate.
//!
//! A lifting sends objects and arrows through a base functor and extends
//! it to fibre elements, laxly compatible with identities and
//! composition. The central example is the Hausdorff lifting of the
//! finite powerset functor, which on a metric-like fibre computes the
//! two-sided Hausdorff value. Transition systems are coalgebras for the
//! powerset functor; their behavioural relation is the greatest fixpoint
//! of the lifted step.

use crate::doctrine::{graph, CheckBudget, Doctrine, FinMap, FinRel, FinSetObj, ObjRef, VRelDoctrine};
use crate::valuealg::subset_label;
use crate::{DocError, LawReport, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A lifting of a base functor between two doctrines.
///
/// Implementations must be monotone on fibres and at least laxly
/// compatible with `d` and composition; `strict` advertises that both
/// compatibilities are equalities.
pub trait Lifting {
    type Src: Doctrine;
    type Tgt: Doctrine;

    fn src(&self) -> &Self::Src;
    fn tgt(&self) -> &Self::Tgt;
    fn name(&self) -> String;
    fn strict(&self) -> bool;
    fn on_obj(&self, x: &<Self::Src as Doctrine>::O) -> Result<<Self::Tgt as Doctrine>::O>;
    fn on_arr(&self, f: &<Self::Src as Doctrine>::A) -> Result<<Self::Tgt as Doctrine>::A>;
    fn on_rel(&self, a: &<Self::Src as Doctrine>::R) -> Result<<Self::Tgt as Doctrine>::R>;
}

/// The identity lifting on a doctrine.
#[derive(Clone, Debug)]
pub struct IdentityLifting<D: Doctrine> {
    pub doc: D,
}

impl<D: Doctrine> Lifting for IdentityLifting<D> {
    type Src = D;
    type Tgt = D;

    fn src(&self) -> &D {
        &self.doc
    }

    fn tgt(&self) -> &D {
        &self.doc
    }

    fn name(&self) -> String {
        "identity".to_string()
    }

    fn strict(&self) -> bool {
        true
    }

    fn on_obj(&self, x: &D::O) -> Result<D::O> {
        Ok(x.clone())
    }

    fn on_arr(&self, f: &D::A) -> Result<D::A> {
        Ok(f.clone())
    }

    fn on_rel(&self, a: &D::R) -> Result<D::R> {
        Ok(a.clone())
    }
}

// ---------------------------------------------------------------------------
// Finite powersets and the Hausdorff lifting
// ---------------------------------------------------------------------------

/// The finite powerset of a set: one element per subset, in bitmask
/// order (bit `i` selects carrier element `i`).
pub fn powerset_obj(x: &ObjRef, cap_bits: usize) -> Result<ObjRef> {
    let n = x.len();
    if n > cap_bits {
        return Err(DocError::SizeLimit(format!(
            "powerset of {} with {n} elements exceeds the {cap_bits}-element cap",
            x.name
        )));
    }
    let elements = (0..1usize << n)
        .map(|mask| {
            let members: Vec<&String> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| &x.elements[i])
                .collect();
            subset_label(&members)
        })
        .collect();
    FinSetObj::new(&format!("P({})", x.name), elements)
}

/// Direct image of a map between finite sets, as a map of powersets.
pub fn direct_image_map(f: &FinMap, cap_bits: usize) -> Result<FinMap> {
    let pd = powerset_obj(&f.dom, cap_bits)?;
    let pc = powerset_obj(&f.cod, cap_bits)?;
    let table = (0..1usize << f.dom.len())
        .map(|mask| {
            let mut image = 0usize;
            for i in 0..f.dom.len() {
                if mask >> i & 1 == 1 {
                    image |= 1 << f.apply(i);
                }
            }
            image
        })
        .collect();
    FinMap::new(pd, pc, table)
}

/// The Hausdorff lifting of the finite powerset functor: on a fibre
/// element `a`, the value at `(A, B)` is the meet of the two one-sided
/// values `meet_{x in A} join_{y in B} a(x, y)` and its converse dual.
/// Over the distance quantale this is the usual Hausdorff distance.
#[derive(Clone, Debug)]
pub struct HausdorffLifting {
    pub doc: VRelDoctrine,
    pub cap_bits: usize,
}

impl HausdorffLifting {
    pub fn new(doc: VRelDoctrine) -> HausdorffLifting {
        HausdorffLifting { doc, cap_bits: 10 }
    }

    fn one_sided(&self, a: &FinRel, amask: usize, bmask: usize) -> crate::valuealg::Value {
        let q = &self.doc.q;
        q.meet((0..a.dom.len()).filter(|i| amask >> i & 1 == 1).map(|i| {
            q.join(
                (0..a.cod.len())
                    .filter(|j| bmask >> j & 1 == 1)
                    .map(|j| a.get(i, j)),
            )
        }))
    }
}

impl Lifting for HausdorffLifting {
    type Src = VRelDoctrine;
    type Tgt = VRelDoctrine;

    fn src(&self) -> &VRelDoctrine {
        &self.doc
    }

    fn tgt(&self) -> &VRelDoctrine {
        &self.doc
    }

    fn name(&self) -> String {
        "hausdorff-powerset".to_string()
    }

    fn strict(&self) -> bool {
        false
    }

    fn on_obj(&self, x: &ObjRef) -> Result<ObjRef> {
        powerset_obj(x, self.cap_bits)
    }

    fn on_arr(&self, f: &FinMap) -> Result<FinMap> {
        direct_image_map(f, self.cap_bits)
    }

    fn on_rel(&self, a: &FinRel) -> Result<FinRel> {
        let pd = powerset_obj(&a.dom, self.cap_bits)?;
        let pc = powerset_obj(&a.cod, self.cap_bits)?;
        let conv = self.doc.conv(a);
        let q = &self.doc.q;
        Ok(FinRel::from_fn(&pd, &pc, |amask, bmask| {
            q.meet2(
                self.one_sided(a, amask, bmask),
                self.one_sided(&conv, bmask, amask),
            )
        }))
    }
}

// ---------------------------------------------------------------------------
// Law battery for liftings
// ---------------------------------------------------------------------------

/// Check lifting laws on the source doctrine's registered objects:
/// monotonicity, lax (or strict) compatibility with `d` and composition,
/// strict compatibility with converse, functoriality on base arrows, and
/// lax compatibility with reindexing.
pub fn check_lifting_laws<L>(lift: &L, budget: &CheckBudget) -> Result<LawReport>
where
    L: Lifting,
{
    let src = lift.src();
    let tgt = lift.tgt();
    let mut rep = LawReport::new();
    let objs = src.objects();
    if objs.is_empty() {
        rep.pass("lifting-laws", "no registered objects, vacuous");
        return Ok(rep);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let scope = format!("{} ({} samples, seed {})", lift.name(), budget.samples, budget.seed);
    let mut fail: std::collections::BTreeMap<&'static str, String> = Default::default();
    let note = |fail: &mut std::collections::BTreeMap<&'static str, String>,
                law: &'static str,
                w: String| {
        fail.entry(law).or_insert(w);
    };

    for _ in 0..budget.samples {
        let x = &objs[rng.gen_range(0..objs.len())];
        let y = &objs[rng.gen_range(0..objs.len())];
        let z = &objs[rng.gen_range(0..objs.len())];
        let a = src.fibre_sample(x, y, &mut rng);
        let b = src.fibre_sample(y, z, &mut rng);
        let fa = lift.on_rel(&a)?;
        let fb = lift.on_rel(&b)?;
        let fx = lift.on_obj(x)?;

        if let Some(m) = src.rel_meet(&a, &src.fibre_sample(x, y, &mut rng)) {
            let fm = lift.on_rel(&m)?;
            if !tgt.rel_leq(&fm, &fa)? {
                note(&mut fail, "lifting-monotone", src.rel_label(&m));
            }
        }
        let fdx = lift.on_rel(&src.d(x))?;
        if !tgt.rel_leq(&tgt.d(&fx), &fdx)? {
            note(&mut fail, "lifting-lax-identity", src.obj_label(x));
        }
        if lift.strict() && !tgt.rel_eq(&tgt.d(&fx), &fdx)? {
            note(&mut fail, "lifting-strict-identity", src.obj_label(x));
        }
        let comp_lift = lift.on_rel(&src.comp(&a, &b)?)?;
        let lift_comp = tgt.comp(&fa, &fb)?;
        if !tgt.rel_leq(&lift_comp, &comp_lift)? {
            note(&mut fail, "lifting-lax-composition", format!(
                "a = {}, b = {}",
                src.rel_label(&a),
                src.rel_label(&b)
            ));
        }
        if lift.strict() && !tgt.rel_eq(&lift_comp, &comp_lift)? {
            note(&mut fail, "lifting-strict-composition", format!(
                "a = {}, b = {}",
                src.rel_label(&a),
                src.rel_label(&b)
            ));
        }
        if !tgt.rel_eq(&lift.on_rel(&src.conv(&a))?, &tgt.conv(&fa))? {
            note(&mut fail, "lifting-preserves-converse", src.rel_label(&a));
        }

        let id_ok = tgt.arr_eq(&lift.on_arr(&src.id_arr(x))?, &tgt.id_arr(&fx));
        if !id_ok {
            note(&mut fail, "lifting-functor-identity", src.obj_label(x));
        }
        let fs = src.arrows(x, y, budget.hom_cap)?;
        let gs = src.arrows(y, z, budget.hom_cap)?;
        if !fs.is_empty() && !gs.is_empty() {
            let f = &fs[rng.gen_range(0..fs.len())];
            let g = &gs[rng.gen_range(0..gs.len())];
            let lhs = lift.on_arr(&src.then_arr(f, g)?)?;
            let rhs = tgt.then_arr(&lift.on_arr(f)?, &lift.on_arr(g)?)?;
            if !tgt.arr_eq(&lhs, &rhs) {
                note(&mut fail, "lifting-functor-composition", format!(
                    "f = {}, g = {}",
                    src.arr_label(f),
                    src.arr_label(g)
                ));
            }
            // reindex(Ff, Fg)(F a') <= F(reindex(f, g, a')) for a' over (y, y)
            let a2 = src.fibre_sample(y, y, &mut rng);
            let gs_xy = src.arrows(x, y, budget.hom_cap)?;
            let g2 = &gs_xy[rng.gen_range(0..gs_xy.len())];
            let lifted_reidx = tgt.reindex(&lift.on_arr(f)?, &lift.on_arr(g2)?, &lift.on_rel(&a2)?)?;
            let reidx_lifted = lift.on_rel(&src.reindex(f, g2, &a2)?)?;
            if !tgt.rel_leq(&lifted_reidx, &reidx_lifted)? {
                note(&mut fail, "lifting-lax-reindex", format!(
                    "f = {}, g = {}, a = {}",
                    src.arr_label(f),
                    src.arr_label(g2),
                    src.rel_label(&a2)
                ));
            }
        }
    }

    for law in [
        "lifting-monotone",
        "lifting-lax-identity",
        "lifting-strict-identity",
        "lifting-lax-composition",
        "lifting-strict-composition",
        "lifting-preserves-converse",
        "lifting-functor-identity",
        "lifting-functor-composition",
        "lifting-lax-reindex",
    ] {
        let strict_only = law.contains("strict");
        if strict_only && !lift.strict() {
            continue;
        }
        match fail.get(law) {
            Some(w) => rep.fail(law, &scope, w.clone()),
            None => rep.pass(law, &scope),
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// 2-arrows between liftings
// ---------------------------------------------------------------------------

/// A family of target arrows `tau_x : F x -> G x`, one per source object.
#[derive(Clone, Debug)]
pub struct TwoArrow<SO, TA> {
    pub components: Vec<(SO, TA)>,
}

impl<SO, TA: Clone> TwoArrow<SO, TA> {
    pub fn at<S: Doctrine<O = SO>>(&self, src: &S, x: &SO) -> Result<TA> {
        self.components
            .iter()
            .find(|(o, _)| src.obj_eq(o, x))
            .map(|(_, t)| t.clone())
            .ok_or_else(|| DocError::UnknownObject(format!("no component at {}", src.obj_label(x))))
    }
}

/// Check that `tau` is a 2-arrow from lifting `F` to lifting `G`:
/// naturality squares commute on base arrows, and on every fibre element
/// the three equivalent inequalities hold (the reindex form and its two
/// graph reformulations).
pub fn check_two_arrow<F, G>(
    f_lift: &F,
    g_lift: &G,
    tau: &TwoArrow<<F::Src as Doctrine>::O, <F::Tgt as Doctrine>::A>,
    budget: &CheckBudget,
) -> Result<LawReport>
where
    F: Lifting,
    G: Lifting<Src = F::Src, Tgt = F::Tgt>,
{
    let src = f_lift.src();
    let tgt = f_lift.tgt();
    let mut rep = LawReport::new();
    let objs = src.objects();
    if objs.is_empty() {
        rep.pass("two-arrow", "no registered objects, vacuous");
        return Ok(rep);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let scope = format!("{} samples, seed {}", budget.samples, budget.seed);
    let mut fail: std::collections::BTreeMap<&'static str, String> = Default::default();

    for _ in 0..budget.samples {
        let x = &objs[rng.gen_range(0..objs.len())];
        let y = &objs[rng.gen_range(0..objs.len())];
        let tx = tau.at(src, x)?;
        let ty = tau.at(src, y)?;
        let arrs = src.arrows(x, y, budget.hom_cap)?;
        if !arrs.is_empty() {
            let f = &arrs[rng.gen_range(0..arrs.len())];
            let lhs = tgt.then_arr(&tx, &g_lift.on_arr(f)?)?;
            let rhs = tgt.then_arr(&f_lift.on_arr(f)?, &ty)?;
            if !tgt.arr_eq(&lhs, &rhs) {
                fail.entry("two-arrow-natural")
                    .or_insert_with(|| src.arr_label(f));
            }
        }
        let a = src.fibre_sample(x, y, &mut rng);
        let fa = f_lift.on_rel(&a)?;
        let ga = g_lift.on_rel(&a)?;
        if !tgt.rel_leq(&fa, &tgt.reindex(&tx, &ty, &ga)?)? {
            fail.entry("two-arrow-fibre")
                .or_insert_with(|| src.rel_label(&a));
        }
        // graph reformulations of the same inequality
        let grx = graph(tgt, &tx)?;
        let gry = graph(tgt, &ty)?;
        if !tgt.rel_leq(&tgt.comp(&fa, &gry)?, &tgt.comp(&grx, &ga)?)? {
            fail.entry("two-arrow-fibre-right-graph")
                .or_insert_with(|| src.rel_label(&a));
        }
        if !tgt.rel_leq(
            &tgt.comp(&tgt.conv(&grx), &fa)?,
            &tgt.comp(&ga, &tgt.conv(&gry))?,
        )? {
            fail.entry("two-arrow-fibre-left-graph")
                .or_insert_with(|| src.rel_label(&a));
        }
    }

    for law in [
        "two-arrow-natural",
        "two-arrow-fibre",
        "two-arrow-fibre-right-graph",
        "two-arrow-fibre-left-graph",
    ] {
        match fail.get(law) {
            Some(w) => rep.fail(law, &scope, w.clone()),
            None => rep.pass(law, &scope),
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Coalgebras and behavioural fixpoints
// ---------------------------------------------------------------------------

/// A finitely branching transition system: a successor set per state.
#[derive(Clone, Debug)]
pub struct Coalgebra {
    pub carrier: ObjRef,
    pub succ: Vec<Vec<usize>>,
}

impl Coalgebra {
    pub fn new(carrier: ObjRef, succ: Vec<Vec<usize>>) -> Result<Coalgebra> {
        if succ.len() != carrier.len() {
            return Err(DocError::MalformedTable(format!(
                "system on {}: one successor set per state is required",
                carrier.name
            )));
        }
        if succ.iter().flatten().any(|&s| s >= carrier.len()) {
            return Err(DocError::MalformedTable(format!(
                "system on {}: successor out of range",
                carrier.name
            )));
        }
        Ok(Coalgebra { carrier, succ })
    }

    pub fn from_named(carrier: ObjRef, edges: &[(&str, Vec<&str>)]) -> Result<Coalgebra> {
        let mut succ = vec![Vec::new(); carrier.len()];
        for (s, ts) in edges {
            let i = carrier
                .index_of(s)
                .ok_or_else(|| DocError::UnknownObject(format!("state {s}")))?;
            for t in ts {
                let j = carrier
                    .index_of(t)
                    .ok_or_else(|| DocError::UnknownObject(format!("state {t}")))?;
                succ[i].push(j);
            }
        }
        Coalgebra::new(carrier, succ)
    }

    /// The structure map into the powerset of the carrier.
    pub fn structure_map(&self, cap_bits: usize) -> Result<FinMap> {
        let pc = powerset_obj(&self.carrier, cap_bits)?;
        let table = self
            .succ
            .iter()
            .map(|ts| ts.iter().fold(0usize, |m, &t| m | 1 << t))
            .collect();
        FinMap::new(self.carrier.clone(), pc, table)
    }
}

/// Iteration control for the behavioural fixpoint. `base` caps the
/// starting relation (ground observations); the default start is the top
/// element of the fibre.
#[derive(Clone, Debug)]
pub struct BisimOptions {
    pub max_iter: usize,
    pub base: Option<FinRel>,
}

impl Default for BisimOptions {
    fn default() -> Self {
        BisimOptions {
            max_iter: 1000,
            base: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BisimOutcome {
    pub rel: FinRel,
    /// The fixpoint was reached and the value algebra is finite, so the
    /// result is exact rather than an eps-stable approximation.
    pub exact: bool,
    pub converged: bool,
    pub iterations: usize,
}

fn step_rel<L>(lift: &L, gc: &FinRel, gd_conv: &FinRel, alpha: &FinRel) -> Result<FinRel>
where
    L: Lifting<Src = VRelDoctrine, Tgt = VRelDoctrine>,
{
    let doc = lift.src();
    doc.comp(&doc.comp(gc, &lift.on_rel(alpha)?)?, gd_conv)
}

/// Is `alpha` a behavioural relation for the two systems, i.e. does one
/// lifted step expand it?
pub fn is_bisimulation<L>(lift: &L, c: &Coalgebra, d: &Coalgebra, alpha: &FinRel) -> Result<bool>
where
    L: Lifting<Src = VRelDoctrine, Tgt = VRelDoctrine>,
{
    let doc = lift.src();
    if alpha.dom != c.carrier || alpha.cod != d.carrier {
        return Err(DocError::ShapeMismatch(
            "relation endpoints must be the two carriers".to_string(),
        ));
    }
    let cap = match lift.on_obj(&c.carrier) {
        Ok(_) => 10,
        Err(e) => return Err(e),
    };
    let gc = graph(doc, &c.structure_map(cap)?)?;
    let gd = graph(doc, &d.structure_map(cap)?)?;
    let stepped = step_rel(lift, &gc, &doc.conv(&gd), alpha)?;
    doc.rel_leq(alpha, &stepped)
}

fn monotone_precheck<L>(lift: &L, x: &ObjRef, y: &ObjRef) -> Result<()>
where
    L: Lifting<Src = VRelDoctrine, Tgt = VRelDoctrine>,
{
    let doc = lift.src();
    let tgt = lift.tgt();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let a = doc.fibre_sample(x, y, &mut rng);
        let b = doc.fibre_sample(x, y, &mut rng);
        let m = doc.rel_meet(&a, &b).expect("matrix fibres have meets");
        if !tgt.rel_leq(&lift.on_rel(&m)?, &lift.on_rel(&a)?)? {
            return Err(DocError::NonMonotoneLifting(format!(
                "{} decreases under {}",
                doc.rel_label(&m),
                lift.name()
            )));
        }
    }
    Ok(())
}

/// Greatest behavioural relation between two systems: iterate
/// `alpha ∧ step(alpha)` from the top of the fibre (capped by `base`
/// when given) until it stabilises or `max_iter` is hit.
pub fn greatest_bisimulation<L>(
    lift: &L,
    c: &Coalgebra,
    d: &Coalgebra,
    opts: &BisimOptions,
) -> Result<BisimOutcome>
where
    L: Lifting<Src = VRelDoctrine, Tgt = VRelDoctrine>,
{
    let doc = lift.src();
    monotone_precheck(lift, &c.carrier, &d.carrier)?;
    let cap = 10;
    let gc = graph(doc, &c.structure_map(cap)?)?;
    let gd_conv = doc.conv(&graph(doc, &d.structure_map(cap)?)?);
    let top = doc
        .rel_top(&c.carrier, &d.carrier)
        .expect("matrix fibres have a top");
    let mut alpha = match &opts.base {
        Some(b) => {
            if b.dom != c.carrier || b.cod != d.carrier {
                return Err(DocError::ShapeMismatch(
                    "base relation endpoints must be the two carriers".to_string(),
                ));
            }
            b.clone()
        }
        None => top,
    };
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        iterations += 1;
        let stepped = step_rel(lift, &gc, &gd_conv, &alpha)?;
        let next = doc
            .rel_meet(&alpha, &stepped)
            .expect("matrix fibres have meets");
        if doc.rel_eq(&next, &alpha)? {
            converged = true;
            alpha = next;
            break;
        }
        alpha = next;
    }
    let exact = converged && doc.q.carrier_len().is_some();
    Ok(BisimOutcome {
        rel: alpha,
        exact,
        converged,
        iterations,
    })
}
