//! Algebras for a monad on finite sets, the doctrine of congruences
//! between them, and projectivity relative to quotient arrows.
//!
//! The bundled monads are the finite powerset (algebras are
//! join-semilattices with bottom) and the identity. Relations between
//! algebras are the congruences: fibre elements absorbed by the two
//! structure maps through the lifted functor. Free algebras are
//! projective, and the structure map itself is the counit quotient
//! splitting through the unit.

use crate::doctrine::{
    cograph, graph, is_surjective, kernel, CheckBudget, Doctrine, FinMap, FinRel, ObjRef,
    VRelDoctrine,
};
use crate::lifting::{direct_image_map, powerset_obj, HausdorffLifting, Lifting};
use crate::quotient::quotient_cert;
use crate::{DocError, LawReport, Result};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Monads on finite sets
// ---------------------------------------------------------------------------

/// A monad on the base category of finite sets, together with its
/// canonical lifting to relations.
#[derive(Clone, Debug)]
pub enum MonadSpec {
    /// Finite powerset: unit is singleton, multiplication is union; the
    /// lifting is the two-sided Hausdorff extension.
    Powerset { doc: VRelDoctrine, cap_bits: usize },
    /// Identity monad: everything is trivial.
    Identity { doc: VRelDoctrine },
}

impl MonadSpec {
    pub fn powerset(doc: VRelDoctrine) -> MonadSpec {
        MonadSpec::Powerset { doc, cap_bits: 10 }
    }

    pub fn identity(doc: VRelDoctrine) -> MonadSpec {
        MonadSpec::Identity { doc }
    }

    pub fn doc(&self) -> &VRelDoctrine {
        match self {
            MonadSpec::Powerset { doc, .. } => doc,
            MonadSpec::Identity { doc } => doc,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MonadSpec::Powerset { .. } => "finite-powerset",
            MonadSpec::Identity { .. } => "identity",
        }
    }

    pub fn on_obj(&self, x: &ObjRef) -> Result<ObjRef> {
        match self {
            MonadSpec::Powerset { cap_bits, .. } => powerset_obj(x, *cap_bits),
            MonadSpec::Identity { .. } => Ok(x.clone()),
        }
    }

    pub fn on_arr(&self, f: &FinMap) -> Result<FinMap> {
        match self {
            MonadSpec::Powerset { cap_bits, .. } => direct_image_map(f, *cap_bits),
            MonadSpec::Identity { .. } => Ok(f.clone()),
        }
    }

    pub fn eta(&self, x: &ObjRef) -> Result<FinMap> {
        match self {
            MonadSpec::Powerset { cap_bits, .. } => {
                let tx = powerset_obj(x, *cap_bits)?;
                FinMap::new(x.clone(), tx, (0..x.len()).map(|i| 1usize << i).collect())
            }
            MonadSpec::Identity { .. } => Ok(FinMap::identity(x)),
        }
    }

    pub fn mu(&self, x: &ObjRef) -> Result<FinMap> {
        match self {
            MonadSpec::Powerset { cap_bits, .. } => {
                let tx = powerset_obj(x, *cap_bits)?;
                let ttx = powerset_obj(&tx, *cap_bits)?;
                let table = (0..1usize << tx.len())
                    .map(|mm| {
                        (0..tx.len())
                            .filter(|k| mm >> k & 1 == 1)
                            .fold(0usize, |acc, k| acc | k)
                    })
                    .collect();
                FinMap::new(ttx, tx, table)
            }
            MonadSpec::Identity { .. } => Ok(FinMap::identity(x)),
        }
    }

    /// Lift a fibre element through the monad's functor.
    pub fn lift_rel(&self, a: &FinRel) -> Result<FinRel> {
        match self {
            MonadSpec::Powerset { doc, cap_bits } => {
                let h = HausdorffLifting {
                    doc: doc.clone(),
                    cap_bits: *cap_bits,
                };
                h.on_rel(a)
            }
            MonadSpec::Identity { .. } => Ok(a.clone()),
        }
    }
}

/// Check the monad equations on the given carriers; probes whose nested
/// applications blow past the powerset cap are skipped.
pub fn check_monad_laws(m: &MonadSpec, carriers: &[ObjRef]) -> Result<LawReport> {
    let mut rep = LawReport::new();
    let scope = format!("{} on {} carriers", m.name(), carriers.len());
    let mut unit_fail = None;
    let mut assoc_fail = None;
    let mut nat_fail = None;
    for x in carriers {
        // Unit laws: eta then mu is the identity, in both nestings.
        match (|| -> Result<(FinMap, FinMap)> {
            let tx = m.on_obj(x)?;
            let left = m.eta(&tx)?.then(&m.mu(x)?)?;
            let right = m.on_arr(&m.eta(x)?)?.then(&m.mu(x)?)?;
            Ok((left, right))
        })() {
            Ok((left, right)) => {
                if !left.is_identity() || !right.is_identity() {
                    unit_fail.get_or_insert_with(|| x.name.clone());
                }
            }
            Err(DocError::SizeLimit(_)) => {}
            Err(e) => return Err(e),
        }
        // Associativity needs a third nesting; often only tiny carriers fit.
        match (|| -> Result<(FinMap, FinMap)> {
            let tx = m.on_obj(x)?;
            let left = m.on_arr(&m.mu(x)?)?.then(&m.mu(x)?)?;
            let right = m.mu(&tx)?.then(&m.mu(x)?)?;
            Ok((left, right))
        })() {
            Ok((left, right)) => {
                if left != right {
                    assoc_fail.get_or_insert_with(|| x.name.clone());
                }
            }
            Err(DocError::SizeLimit(_)) => {}
            Err(e) => return Err(e),
        }
        // Naturality of eta and mu along all maps between probe carriers.
        for y in carriers {
            match (|| -> Result<bool> {
                let mut ok = true;
                for f in FinMap::all_maps(x, y, 4096)? {
                    let tf = m.on_arr(&f)?;
                    if f.then(&m.eta(y)?)? != m.eta(x)?.then(&tf)? {
                        ok = false;
                    }
                    let ttf = m.on_arr(&tf)?;
                    if ttf.then(&m.mu(y)?)? != m.mu(x)?.then(&tf)? {
                        ok = false;
                    }
                }
                Ok(ok)
            })() {
                Ok(true) => {}
                Ok(false) => {
                    nat_fail.get_or_insert_with(|| format!("{} -> {}", x.name, y.name));
                }
                Err(DocError::SizeLimit(_)) | Err(DocError::CapExceeded(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    rep.record("monad-unit-laws", &scope, unit_fail.is_none(), || {
        unit_fail.clone().unwrap()
    });
    rep.record("monad-associativity", &scope, assoc_fail.is_none(), || {
        assoc_fail.clone().unwrap()
    });
    rep.record("monad-naturality", &scope, nat_fail.is_none(), || {
        nat_fail.clone().unwrap()
    });
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Algebras
// ---------------------------------------------------------------------------

/// An algebra for the monad: a carrier with a structure map satisfying
/// the unit and multiplication laws.
#[derive(Clone, Debug)]
pub struct Algebra {
    pub carrier: ObjRef,
    pub structure: FinMap,
    /// Present when this algebra was built freely on a generator set.
    pub free_on: Option<ObjRef>,
}

impl Algebra {
    pub fn label(&self) -> String {
        match &self.free_on {
            Some(g) => format!("free({})", g.name),
            None => self.carrier.name.clone(),
        }
    }
}

/// Validate the two algebra laws.
pub fn check_algebra(m: &MonadSpec, alg: &Algebra) -> Result<()> {
    let a = &alg.structure;
    if a.cod != alg.carrier || a.dom != m.on_obj(&alg.carrier)? {
        return Err(DocError::PreconditionFailed(format!(
            "structure map of {} has the wrong shape",
            alg.label()
        )));
    }
    // A carrier of the shape T(g) structured by the multiplication is an
    // algebra by the monad equations; checking its multiplication law
    // head-on would need a third nesting of the functor.
    if let Some(g) = &alg.free_on {
        if alg.carrier == m.on_obj(g)? && *a == m.mu(g)? {
            return Ok(());
        }
    }
    if !m.eta(&alg.carrier)?.then(a)?.is_identity() {
        return Err(DocError::PreconditionFailed(format!(
            "unit law fails for {}",
            alg.label()
        )));
    }
    let left = m.on_arr(a)?.then(a)?;
    let right = m.mu(&alg.carrier)?.then(a)?;
    if left != right {
        return Err(DocError::PreconditionFailed(format!(
            "multiplication law fails for {}",
            alg.label()
        )));
    }
    Ok(())
}

/// The free algebra on a generator set: the monad's value with its
/// multiplication as structure.
pub fn free_algebra(m: &MonadSpec, generators: &ObjRef) -> Result<Algebra> {
    Ok(Algebra {
        carrier: m.on_obj(generators)?,
        structure: m.mu(generators)?,
        free_on: Some(generators.clone()),
    })
}

/// The chain join-semilattice with `n` points as a powerset algebra:
/// a subset is sent to its greatest member, the empty set to the least.
pub fn chain_semilattice(m: &MonadSpec, n: usize) -> Result<Algebra> {
    if n == 0 {
        return Err(DocError::EmptyBase);
    }
    let carrier = crate::doctrine::FinSetObj::new(
        &format!("chain{n}"),
        (0..n).map(|i| format!("c{i}")).collect(),
    )?;
    let t = m.on_obj(&carrier)?;
    let table = (0..t.len())
        .map(|mask| {
            (0..n)
                .rev()
                .find(|i| mask >> i & 1 == 1)
                .unwrap_or(0)
        })
        .collect();
    let structure = FinMap::new(t, carrier.clone(), table)?;
    let alg = Algebra {
        carrier,
        structure,
        free_on: None,
    };
    check_algebra(m, &alg)?;
    Ok(alg)
}

/// Is a carrier map an algebra homomorphism?
pub fn is_algebra_hom(m: &MonadSpec, dom: &Algebra, cod: &Algebra, f: &FinMap) -> Result<bool> {
    if f.dom != dom.carrier || f.cod != cod.carrier {
        return Ok(false);
    }
    Ok(dom.structure.then(f)? == m.on_arr(f)?.then(&cod.structure)?)
}

/// The unique homomorphism out of a free algebra determined by images
/// of the generators.
pub fn free_hom_from_generators(
    m: &MonadSpec,
    generators: &ObjRef,
    target: &Algebra,
    images: &FinMap,
) -> Result<FinMap> {
    if images.dom != *generators || images.cod != target.carrier {
        return Err(DocError::ShapeMismatch(
            "generator images must map the generators into the target carrier".to_string(),
        ));
    }
    let h = m.on_arr(images)?.then(&target.structure)?;
    let free = free_algebra(m, generators)?;
    if !is_algebra_hom(m, &free, target, &h)? {
        return Err(DocError::PreconditionFailed(
            "induced map is not a homomorphism".to_string(),
        ));
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// The doctrine of congruences
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct EmArr {
    pub dom: Algebra,
    pub cod: Algebra,
    pub map: FinMap,
}

#[derive(Clone, Debug)]
pub struct EmRel {
    pub dom: Algebra,
    pub cod: Algebra,
    pub rel: FinRel,
}

/// Algebras, their homomorphisms, and congruences between them: fibre
/// elements `a` with `cograph(s) ; lift(a) ; graph(t) <= a` for the two
/// structure maps `s`, `t`.
#[derive(Clone, Debug)]
pub struct EmDoctrine {
    pub base: VRelDoctrine,
    pub monad: MonadSpec,
    pub algebras: Vec<Algebra>,
}

/// Validated construction: algebra laws must hold for every entry.
pub fn em_doctrine(monad: MonadSpec, algebras: Vec<Algebra>) -> Result<EmDoctrine> {
    for alg in &algebras {
        check_algebra(&monad, alg)?;
    }
    Ok(EmDoctrine {
        base: monad.doc().clone(),
        monad,
        algebras,
    })
}

impl EmDoctrine {
    fn alg_eq(&self, x: &Algebra, y: &Algebra) -> bool {
        x.carrier == y.carrier && x.structure == y.structure
    }

    pub fn is_congruence(&self, x: &Algebra, y: &Algebra, rel: &FinRel) -> Result<bool> {
        let pushed = self.congruence_step(x, y, rel)?;
        self.base.rel_leq(&pushed, rel)
    }

    fn congruence_step(&self, x: &Algebra, y: &Algebra, rel: &FinRel) -> Result<FinRel> {
        let ga = cograph(&self.base, &x.structure)?;
        let gb = graph(&self.base, &y.structure)?;
        self.base
            .comp(&self.base.comp(&ga, &self.monad.lift_rel(rel)?)?, &gb)
    }

    /// Least congruence above a fibre element, by iterated closure.
    pub fn congruence_closure(&self, x: &Algebra, y: &Algebra, rel: &FinRel) -> Result<FinRel> {
        let mut cur = rel.clone();
        for _ in 0..256 {
            let stepped = self.congruence_step(x, y, &cur)?;
            let next = self
                .base
                .rel_join(&cur, &stepped)
                .expect("matrix fibres have joins");
            if self.base.rel_eq(&next, &cur)? {
                return Ok(next);
            }
            cur = next;
        }
        Ok(cur)
    }
}

impl Doctrine for EmDoctrine {
    type O = Algebra;
    type A = EmArr;
    type R = EmRel;

    fn tag(&self) -> &'static str {
        "algebras"
    }

    fn objects(&self) -> Vec<Algebra> {
        self.algebras.clone()
    }

    fn obj_eq(&self, x: &Algebra, y: &Algebra) -> bool {
        self.alg_eq(x, y)
    }

    fn obj_label(&self, x: &Algebra) -> String {
        x.label()
    }

    fn check_obj(&self, x: &Algebra) -> Result<()> {
        check_algebra(&self.monad, x)
    }

    fn arrows(&self, x: &Algebra, y: &Algebra, cap: usize) -> Result<Vec<EmArr>> {
        let mut out = Vec::new();
        // Out of a free algebra every generator assignment extends
        // uniquely, so enumerate those instead of all carrier maps.
        if let Some(g) = &x.free_on {
            if x.carrier == self.monad.on_obj(g)? && x.structure == self.monad.mu(g)? {
                for images in FinMap::all_maps(g, &y.carrier, cap)? {
                    let h = free_hom_from_generators(&self.monad, g, y, &images)?;
                    out.push(EmArr {
                        dom: x.clone(),
                        cod: y.clone(),
                        map: h,
                    });
                }
                return Ok(out);
            }
        }
        for f in FinMap::all_maps(&x.carrier, &y.carrier, cap)? {
            if is_algebra_hom(&self.monad, x, y, &f)? {
                out.push(EmArr {
                    dom: x.clone(),
                    cod: y.clone(),
                    map: f,
                });
            }
        }
        Ok(out)
    }

    fn arr_dom(&self, f: &EmArr) -> Algebra {
        f.dom.clone()
    }

    fn arr_cod(&self, f: &EmArr) -> Algebra {
        f.cod.clone()
    }

    fn arr_eq(&self, f: &EmArr, g: &EmArr) -> bool {
        self.alg_eq(&f.dom, &g.dom) && self.alg_eq(&f.cod, &g.cod) && f.map == g.map
    }

    fn id_arr(&self, x: &Algebra) -> EmArr {
        EmArr {
            dom: x.clone(),
            cod: x.clone(),
            map: FinMap::identity(&x.carrier),
        }
    }

    fn then_arr(&self, f: &EmArr, g: &EmArr) -> Result<EmArr> {
        if !self.alg_eq(&f.cod, &g.dom) {
            return Err(DocError::ShapeMismatch(
                "homomorphisms do not compose".to_string(),
            ));
        }
        Ok(EmArr {
            dom: f.dom.clone(),
            cod: g.cod.clone(),
            map: f.map.then(&g.map)?,
        })
    }

    fn arr_label(&self, f: &EmArr) -> String {
        format!("{}->{} {}", f.dom.label(), f.cod.label(), f.map.label())
    }

    fn rel_dom(&self, a: &EmRel) -> Algebra {
        a.dom.clone()
    }

    fn rel_cod(&self, a: &EmRel) -> Algebra {
        a.cod.clone()
    }

    fn rel_leq(&self, a: &EmRel, b: &EmRel) -> Result<bool> {
        if !self.alg_eq(&a.dom, &b.dom) || !self.alg_eq(&a.cod, &b.cod) {
            return Err(DocError::ShapeMismatch("congruence order".to_string()));
        }
        self.base.rel_leq(&a.rel, &b.rel)
    }

    fn d(&self, x: &Algebra) -> EmRel {
        EmRel {
            dom: x.clone(),
            cod: x.clone(),
            rel: self.base.d(&x.carrier),
        }
    }

    fn comp(&self, a: &EmRel, b: &EmRel) -> Result<EmRel> {
        if !self.alg_eq(&a.cod, &b.dom) {
            return Err(DocError::ShapeMismatch("congruence composition".to_string()));
        }
        Ok(EmRel {
            dom: a.dom.clone(),
            cod: b.cod.clone(),
            rel: self.base.comp(&a.rel, &b.rel)?,
        })
    }

    fn conv(&self, a: &EmRel) -> EmRel {
        EmRel {
            dom: a.cod.clone(),
            cod: a.dom.clone(),
            rel: self.base.conv(&a.rel),
        }
    }

    fn reindex(&self, f: &EmArr, g: &EmArr, a: &EmRel) -> Result<EmRel> {
        if !self.alg_eq(&f.cod, &a.dom) || !self.alg_eq(&g.cod, &a.cod) {
            return Err(DocError::ShapeMismatch("congruence reindex".to_string()));
        }
        Ok(EmRel {
            dom: f.dom.clone(),
            cod: g.dom.clone(),
            rel: self.base.reindex(&f.map, &g.map, &a.rel)?,
        })
    }

    fn rel_label(&self, a: &EmRel) -> String {
        self.base.rel_label(&a.rel)
    }

    fn fibre_enum(&self, x: &Algebra, y: &Algebra, cap: usize) -> Result<Option<Vec<EmRel>>> {
        let all = match self.base.fibre_enum(&x.carrier, &y.carrier, cap)? {
            Some(v) => v,
            None => return Ok(None),
        };
        let mut out = Vec::new();
        for rel in all {
            if self.is_congruence(x, y, &rel)? {
                out.push(EmRel {
                    dom: x.clone(),
                    cod: y.clone(),
                    rel,
                });
            }
        }
        Ok(Some(out))
    }

    fn fibre_sample(&self, x: &Algebra, y: &Algebra, rng: &mut ChaCha8Rng) -> EmRel {
        let raw = self.base.fibre_sample(&x.carrier, &y.carrier, rng);
        let rel = self
            .congruence_closure(x, y, &raw)
            .expect("closure of a well-shaped sample");
        EmRel {
            dom: x.clone(),
            cod: y.clone(),
            rel,
        }
    }

    fn rel_meet(&self, a: &EmRel, b: &EmRel) -> Option<EmRel> {
        if !self.alg_eq(&a.dom, &b.dom) || !self.alg_eq(&a.cod, &b.cod) {
            return None;
        }
        // Congruences are closed under meets: the step is monotone.
        self.base.rel_meet(&a.rel, &b.rel).map(|rel| EmRel {
            dom: a.dom.clone(),
            cod: a.cod.clone(),
            rel,
        })
    }

    fn rel_top(&self, x: &Algebra, y: &Algebra) -> Option<EmRel> {
        self.base.rel_top(&x.carrier, &y.carrier).map(|rel| EmRel {
            dom: x.clone(),
            cod: y.clone(),
            rel,
        })
    }
}

// ---------------------------------------------------------------------------
// Projectivity
// ---------------------------------------------------------------------------

/// Is the object projective relative to the given quotient arrows: does
/// every arrow into a quotient's codomain lift through it?
pub fn is_projective<D: Doctrine>(
    doc: &D,
    p: &D::O,
    quotients: &[D::A],
    hom_cap: usize,
) -> Result<(bool, Option<String>)> {
    for q in quotients {
        let y = doc.arr_dom(q);
        let z = doc.arr_cod(q);
        for f in doc.arrows(p, &z, hom_cap)? {
            let mut lifted = false;
            for h in doc.arrows(p, &y, hom_cap)? {
                if doc.arr_eq(&doc.then_arr(&h, q)?, &f) {
                    lifted = true;
                    break;
                }
            }
            if !lifted {
                return Ok((
                    false,
                    Some(format!(
                        "{} does not lift through {}",
                        doc.arr_label(&f),
                        doc.arr_label(q)
                    )),
                ));
            }
        }
    }
    Ok((true, None))
}

/// Projectivity in the quotient completion against all canonical
/// coarsenings of the registered objects. Returns whether the object is
/// discrete, whether it is projective, and a witness if not.
pub fn check_proj_obj_qc<D: Doctrine>(
    qr: &crate::quotient::QrDoctrine<D>,
    obj: &crate::quotient::QrObj<D>,
    hom_cap: usize,
) -> Result<(bool, bool, Option<String>)> {
    let base = &qr.base;
    let discrete = base.rel_eq(&obj.rho, &base.d(&obj.base))?;
    let mut quotients = Vec::new();
    for w in &qr.objects {
        let disc = crate::quotient::discrete_obj(base, &w.base);
        quotients.push(crate::quotient::qr_quotient_arrow(qr, &disc, w)?);
    }
    let (proj, witness) = is_projective(qr, obj, &quotients, hom_cap)?;
    Ok((discrete, proj, witness))
}

/// A projective object with a surjective arrow onto the target.
pub fn is_projective_cover<D: Doctrine>(
    doc: &D,
    cover: &D::A,
    quotients: &[D::A],
    hom_cap: usize,
) -> Result<(bool, Option<String>)> {
    let p = doc.arr_dom(cover);
    let (proj, witness) = is_projective(doc, &p, quotients, hom_cap)?;
    if !proj {
        return Ok((false, witness));
    }
    if !is_surjective(doc, &graph(doc, cover)?)? {
        return Ok((
            false,
            Some(format!("{} is not surjective", doc.arr_label(cover))),
        ));
    }
    Ok((true, None))
}

/// Check that the structure map of an algebra, seen as an arrow out of
/// the free algebra on its carrier, is a split, effective quotient of
/// its kernel.
pub fn counit_quotient_check(
    em: &EmDoctrine,
    alg: &Algebra,
    budget: &CheckBudget,
) -> Result<LawReport> {
    let mut rep = LawReport::new();
    let scope = alg.label();
    let free = free_algebra(&em.monad, &alg.carrier)?;
    let eps = EmArr {
        dom: free.clone(),
        cod: alg.clone(),
        map: alg.structure.clone(),
    };
    rep.record(
        "counit-is-homomorphism",
        &scope,
        is_algebra_hom(&em.monad, &free, alg, &eps.map)?,
        String::new,
    );
    rep.record(
        "counit-splits-via-unit",
        &scope,
        em.monad.eta(&alg.carrier)?.then(&eps.map)?.is_identity(),
        String::new,
    );
    let ker = kernel(em, &eps)?;
    let cert = quotient_cert(em, &eps, &ker, &em.objects(), budget)?;
    rep.record("counit-is-quotient", &scope, cert.is_quotient, || {
        cert.failure.clone().unwrap_or_default()
    });
    rep.record("counit-effective", &scope, cert.effective, String::new);
    rep.record("counit-descent", &scope, cert.descent, String::new);
    Ok(rep)
}
