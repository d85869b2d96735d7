//! Order, product and choice structure on top of a doctrine: monotone
//! composition, the category of maps, unique choice, finite products on
//! fibres, the modular and Frobenius laws, and the correspondence
//! between relations and predicates on a product.
//!
//! Also hosts a four-element tabulated doctrine that satisfies every
//! doctrine law yet breaks the modular law, pinning down that the law
//! is independent of the axioms.

use std::collections::BTreeMap;

use crate::doctrine::{
    graph, is_functional, is_total, CartesianBase, CheckBudget, Doctrine, PresFibre,
    PresentedBase, PresentedDoctrine,
};
use crate::{DocError, LawReport, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pool<D: Doctrine>(
    doc: &D,
    x: &D::O,
    y: &D::O,
    budget: &CheckBudget,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<D::R>> {
    match doc.fibre_enum(x, y, budget.fibre_cap) {
        Ok(Some(all)) => return Ok(all),
        Ok(None) | Err(DocError::CapExceeded(_)) => {}
        Err(e) => return Err(e),
    }
    Ok((0..budget.samples)
        .map(|_| doc.fibre_sample(x, y, rng))
        .collect())
}

// ---------------------------------------------------------------------------
// Ordered structure and the category of maps
// ---------------------------------------------------------------------------

/// Composition and converse must be monotone in the fibre order.
pub fn check_ordered<D: Doctrine>(doc: &D, budget: &CheckBudget) -> Result<LawReport> {
    let mut rep = LawReport::new();
    let objects = doc.objects();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut left = None;
    let mut right = None;
    let mut conv = None;
    for x in &objects {
        for y in &objects {
            let xy = pool(doc, x, y, budget, &mut rng)?;
            for z in &objects {
                let yz = pool(doc, y, z, budget, &mut rng)?;
                let mut pairs = Vec::new();
                for a in xy.iter().take(12) {
                    for b in xy.iter().take(12) {
                        let lo = match doc.rel_meet(a, b) {
                            Some(m) => m,
                            None if doc.rel_leq(a, b)? => a.clone(),
                            None => continue,
                        };
                        pairs.push((lo, a.clone()));
                    }
                }
                for (lo, hi) in &pairs {
                    if !doc.rel_leq(&doc.conv(lo), &doc.conv(hi))? {
                        conv.get_or_insert_with(|| doc.rel_label(lo));
                    }
                    for c in yz.iter().take(12) {
                        if !doc.rel_leq(&doc.comp(lo, c)?, &doc.comp(hi, c)?)? {
                            right.get_or_insert_with(|| doc.rel_label(lo));
                        }
                    }
                }
                let zx = pool(doc, z, x, budget, &mut rng)?;
                for (lo, hi) in &pairs {
                    for c in zx.iter().take(12) {
                        if !doc.rel_leq(&doc.comp(c, lo)?, &doc.comp(c, hi)?)? {
                            left.get_or_insert_with(|| doc.rel_label(lo));
                        }
                    }
                }
            }
        }
    }
    let scope = format!("{} over {} objects", doc.tag(), objects.len());
    rep.record("composition-monotone-right", &scope, right.is_none(), || {
        right.clone().unwrap()
    });
    rep.record("composition-monotone-left", &scope, left.is_none(), || {
        left.clone().unwrap()
    });
    rep.record("converse-monotone", &scope, conv.is_none(), || {
        conv.clone().unwrap()
    });
    Ok(rep)
}

/// The functional, total elements of one fibre, in enumeration order.
pub fn map_elements<D: Doctrine>(doc: &D, x: &D::O, y: &D::O, cap: usize) -> Result<Vec<D::R>> {
    let all = doc
        .fibre_enum(x, y, cap)?
        .ok_or_else(|| DocError::CapExceeded("fibre is not enumerable".to_string()))?;
    let mut out = Vec::new();
    for a in all {
        if is_functional(doc, &a)? && is_total(doc, &a)? {
            out.push(a);
        }
    }
    Ok(out)
}

/// Identities are maps and maps compose, so the maps form a category.
pub fn check_maps_category<D: Doctrine>(doc: &D, budget: &CheckBudget) -> Result<LawReport> {
    let mut rep = LawReport::new();
    let objects = doc.objects();
    let mut id_fail = None;
    let mut comp_fail = None;
    for x in &objects {
        let d = doc.d(x);
        if !(is_functional(doc, &d)? && is_total(doc, &d)?) {
            id_fail.get_or_insert_with(|| doc.obj_label(x));
        }
    }
    for x in &objects {
        for y in &objects {
            let fs = map_elements(doc, x, y, budget.fibre_cap)?;
            for z in &objects {
                let gs = map_elements(doc, y, z, budget.fibre_cap)?;
                for f in &fs {
                    for g in &gs {
                        let fg = doc.comp(f, g)?;
                        if !(is_functional(doc, &fg)? && is_total(doc, &fg)?) {
                            comp_fail.get_or_insert_with(|| {
                                format!("{} ; {}", doc.rel_label(f), doc.rel_label(g))
                            });
                        }
                    }
                }
            }
        }
    }
    let scope = format!("{} over {} objects", doc.tag(), objects.len());
    rep.record("identity-is-a-map", &scope, id_fail.is_none(), || {
        id_fail.clone().unwrap()
    });
    rep.record(
        "maps-closed-under-composition",
        &scope,
        comp_fail.is_none(),
        || comp_fail.clone().unwrap(),
    );
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Relations over the base of maps
// ---------------------------------------------------------------------------

/// An arrow of the map-base doctrine: a functional, total fibre element.
#[derive(Clone, Debug)]
pub struct MapArr<D: Doctrine> {
    pub rel: D::R,
}

/// The doctrine whose base arrows are the maps of the inner doctrine and
/// whose reindexing is plain composition with the map and a converse.
/// Unique choice holds here by construction: every functional total
/// element is its own graph.
#[derive(Clone, Debug)]
pub struct RMapDoctrine<D: Doctrine> {
    pub inner: D,
}

pub fn rmap_doctrine<D: Doctrine>(inner: D) -> RMapDoctrine<D> {
    RMapDoctrine { inner }
}

impl<D: Doctrine> RMapDoctrine<D> {
    fn check_map(&self, rel: &D::R) -> Result<()> {
        if !(is_functional(&self.inner, rel)? && is_total(&self.inner, rel)?) {
            return Err(DocError::PreconditionFailed(format!(
                "{} is not functional and total",
                self.inner.rel_label(rel)
            )));
        }
        Ok(())
    }
}

impl<D: Doctrine> Doctrine for RMapDoctrine<D> {
    type O = D::O;
    type A = MapArr<D>;
    type R = D::R;

    fn tag(&self) -> &'static str {
        "map-base"
    }

    fn objects(&self) -> Vec<D::O> {
        self.inner.objects()
    }

    fn obj_eq(&self, x: &D::O, y: &D::O) -> bool {
        self.inner.obj_eq(x, y)
    }

    fn obj_label(&self, x: &D::O) -> String {
        self.inner.obj_label(x)
    }

    fn check_obj(&self, x: &D::O) -> Result<()> {
        self.inner.check_obj(x)
    }

    fn arrows(&self, x: &D::O, y: &D::O, cap: usize) -> Result<Vec<MapArr<D>>> {
        Ok(map_elements(&self.inner, x, y, cap)?
            .into_iter()
            .map(|rel| MapArr { rel })
            .collect())
    }

    fn arr_dom(&self, f: &MapArr<D>) -> D::O {
        self.inner.rel_dom(&f.rel)
    }

    fn arr_cod(&self, f: &MapArr<D>) -> D::O {
        self.inner.rel_cod(&f.rel)
    }

    fn arr_eq(&self, f: &MapArr<D>, g: &MapArr<D>) -> bool {
        self.inner.rel_eq(&f.rel, &g.rel).unwrap_or(false)
    }

    fn id_arr(&self, x: &D::O) -> MapArr<D> {
        MapArr {
            rel: self.inner.d(x),
        }
    }

    fn then_arr(&self, f: &MapArr<D>, g: &MapArr<D>) -> Result<MapArr<D>> {
        Ok(MapArr {
            rel: self.inner.comp(&f.rel, &g.rel)?,
        })
    }

    fn arr_label(&self, f: &MapArr<D>) -> String {
        self.inner.rel_label(&f.rel)
    }

    fn rel_dom(&self, a: &D::R) -> D::O {
        self.inner.rel_dom(a)
    }

    fn rel_cod(&self, a: &D::R) -> D::O {
        self.inner.rel_cod(a)
    }

    fn rel_leq(&self, a: &D::R, b: &D::R) -> Result<bool> {
        self.inner.rel_leq(a, b)
    }

    fn d(&self, x: &D::O) -> D::R {
        self.inner.d(x)
    }

    fn comp(&self, a: &D::R, b: &D::R) -> Result<D::R> {
        self.inner.comp(a, b)
    }

    fn conv(&self, a: &D::R) -> D::R {
        self.inner.conv(a)
    }

    fn reindex(&self, f: &MapArr<D>, g: &MapArr<D>, a: &D::R) -> Result<D::R> {
        self.check_map(&f.rel)?;
        self.check_map(&g.rel)?;
        self.inner
            .comp(&self.inner.comp(&f.rel, a)?, &self.inner.conv(&g.rel))
    }

    fn rel_label(&self, a: &D::R) -> String {
        self.inner.rel_label(a)
    }

    fn fibre_enum(&self, x: &D::O, y: &D::O, cap: usize) -> Result<Option<Vec<D::R>>> {
        self.inner.fibre_enum(x, y, cap)
    }

    fn fibre_sample(&self, x: &D::O, y: &D::O, rng: &mut ChaCha8Rng) -> D::R {
        self.inner.fibre_sample(x, y, rng)
    }

    fn rel_meet(&self, a: &D::R, b: &D::R) -> Option<D::R> {
        self.inner.rel_meet(a, b)
    }

    fn rel_join(&self, a: &D::R, b: &D::R) -> Option<D::R> {
        self.inner.rel_join(a, b)
    }

    fn rel_top(&self, x: &D::O, y: &D::O) -> Option<D::R> {
        self.inner.rel_top(x, y)
    }

    fn rel_bot(&self, x: &D::O, y: &D::O) -> Option<D::R> {
        self.inner.rel_bot(x, y)
    }
}

// ---------------------------------------------------------------------------
// Unique choice
// ---------------------------------------------------------------------------

/// Does every functional, total fibre element over `(x, y)` arise as the
/// graph of an arrow? Returns the first counterexample in enumeration
/// order otherwise.
pub fn check_ruc<D: Doctrine>(
    doc: &D,
    x: &D::O,
    y: &D::O,
    cap: usize,
) -> Result<(bool, Option<String>)> {
    let mut graphs = Vec::new();
    for f in doc.arrows(x, y, cap)? {
        graphs.push(graph(doc, &f)?);
    }
    for a in map_elements(doc, x, y, cap)? {
        let mut hit = false;
        for g in &graphs {
            if doc.rel_eq(g, &a)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok((false, Some(doc.rel_label(&a))));
        }
    }
    Ok((true, None))
}

/// Unique choice over every pair of registered objects.
pub fn check_ruc_all<D: Doctrine>(doc: &D, cap: usize) -> Result<(bool, Option<String>)> {
    for x in doc.objects() {
        for y in doc.objects() {
            let (ok, w) = check_ruc(doc, &x, &y, cap)?;
            if !ok {
                let scope = format!("({},{})", doc.obj_label(&x), doc.obj_label(&y));
                return Ok((false, Some(format!("{} in {scope}", w.unwrap()))));
            }
        }
    }
    Ok((true, None))
}

// ---------------------------------------------------------------------------
// Products on fibres
// ---------------------------------------------------------------------------

/// The product relation on chosen products: restrict along the two
/// projection pairs and meet.
pub fn box_product<D>(doc: &D, a: &D::R, b: &D::R) -> Result<D::R>
where
    D: Doctrine + CartesianBase,
{
    let (_, p1, p2) = doc.product(&doc.rel_dom(a), &doc.rel_dom(b))?;
    let (_, q1, q2) = doc.product(&doc.rel_cod(a), &doc.rel_cod(b))?;
    let left = doc.comp(
        &doc.comp(&graph(doc, &p1)?, a)?,
        &doc.conv(&graph(doc, &q1)?),
    )?;
    let right = doc.comp(
        &doc.comp(&graph(doc, &p2)?, b)?,
        &doc.conv(&graph(doc, &q2)?),
    )?;
    doc.rel_meet(&left, &right).ok_or_else(|| {
        DocError::PreconditionFailed("fibre meets are unavailable".to_string())
    })
}

/// Product structure: meets are greatest lower bounds, tops are greatest,
/// reindexing preserves meets, the terminal identity is the top scalar,
/// product identities decompose through the projections, and the product
/// relation interchanges with composition laxly (strictly only over some
/// value algebras).
pub fn check_cartesian<D>(doc: &D, budget: &CheckBudget) -> Result<LawReport>
where
    D: Doctrine + CartesianBase,
{
    let mut rep = LawReport::new();
    let objects = doc.objects();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let scope = format!("{} over {} objects", doc.tag(), objects.len());
    let mut fails: BTreeMap<&'static str, String> = BTreeMap::new();

    let one = doc.terminal()?;
    if !doc.rel_eq(
        &doc.d(&one),
        &doc
            .rel_top(&one, &one)
            .ok_or_else(|| DocError::PreconditionFailed("no top scalar".to_string()))?,
    )? {
        fails.insert("terminal-identity-is-top", doc.obj_label(&one));
    }

    for x in &objects {
        for y in &objects {
            let (xy, p1, p2) = doc.product(x, y)?;
            let g1 = graph(doc, &p1)?;
            let g2 = graph(doc, &p2)?;
            let split = doc
                .rel_meet(
                    &doc.comp(&g1, &doc.conv(&g1))?,
                    &doc.comp(&g2, &doc.conv(&g2))?,
                )
                .ok_or_else(|| DocError::PreconditionFailed("no fibre meets".to_string()))?;
            if !doc.rel_eq(&doc.d(&xy), &split)? {
                fails
                    .entry("product-identity-decomposes")
                    .or_insert_with(|| doc.obj_label(&xy));
            }

            let xs = pool(doc, x, y, budget, &mut rng)?;
            let top = doc.rel_top(x, y).unwrap();
            for a in xs.iter().take(16) {
                if !doc.rel_leq(a, &top)? {
                    fails
                        .entry("fibre-top-is-greatest")
                        .or_insert_with(|| doc.rel_label(a));
                }
                for b in xs.iter().take(16) {
                    let m = doc.rel_meet(a, b).unwrap();
                    if !(doc.rel_leq(&m, a)? && doc.rel_leq(&m, b)?) {
                        fails
                            .entry("fibre-meet-is-lower-bound")
                            .or_insert_with(|| doc.rel_label(&m));
                    }
                    for c in xs.iter().take(8) {
                        if doc.rel_leq(c, a)? && doc.rel_leq(c, b)? && !doc.rel_leq(c, &m)? {
                            fails
                                .entry("fibre-meet-is-greatest-lower-bound")
                                .or_insert_with(|| doc.rel_label(c));
                        }
                    }
                }
            }

            // Reindexing along arrows preserves meets.
            for w in &objects {
                for f in doc.arrows(w, x, budget.hom_cap)?.iter().take(6) {
                    for g in doc.arrows(w, y, budget.hom_cap)?.iter().take(6) {
                        for a in xs.iter().take(6) {
                            for b in xs.iter().take(6) {
                                let m = doc.rel_meet(a, b).unwrap();
                                let lhs = doc.reindex(f, g, &m)?;
                                let rhs = doc
                                    .rel_meet(&doc.reindex(f, g, a)?, &doc.reindex(f, g, b)?)
                                    .unwrap();
                                if !doc.rel_eq(&lhs, &rhs)? {
                                    fails
                                        .entry("reindex-preserves-meets")
                                        .or_insert_with(|| doc.rel_label(&m));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Interchange of the product relation with composition.
    for x in &objects {
        for y in &objects {
            for z in &objects {
                let mut quads = Vec::new();
                for _ in 0..budget.samples.min(24) {
                    quads.push((
                        doc.fibre_sample(x, y, &mut rng),
                        doc.fibre_sample(x, y, &mut rng),
                        doc.fibre_sample(y, z, &mut rng),
                        doc.fibre_sample(y, z, &mut rng),
                    ));
                }
                for (a, b, c, e) in &quads {
                    let lhs = doc.comp(&box_product(doc, a, b)?, &box_product(doc, c, e)?)?;
                    let rhs = box_product(doc, &doc.comp(a, c)?, &doc.comp(b, e)?)?;
                    if !doc.rel_leq(&lhs, &rhs)? {
                        fails
                            .entry("product-interchange-lax")
                            .or_insert_with(|| doc.rel_label(a));
                    }
                    if !doc.rel_eq(&lhs, &rhs)? {
                        fails
                            .entry("product-interchange-strict")
                            .or_insert_with(|| doc.rel_label(a));
                    }
                }
            }
        }
    }

    for law in [
        "terminal-identity-is-top",
        "product-identity-decomposes",
        "fibre-top-is-greatest",
        "fibre-meet-is-lower-bound",
        "fibre-meet-is-greatest-lower-bound",
        "reindex-preserves-meets",
        "product-interchange-lax",
        "product-interchange-strict",
    ] {
        rep.record(law, &scope, !fails.contains_key(law), || fails[law].clone());
    }
    Ok(rep)
}

/// The Frobenius law along graphs of arrows:
/// `(a ; gr f) /\ b = (a /\ (b ; gr f conv)) ; gr f`.
pub fn check_frobenius<D: Doctrine>(doc: &D, budget: &CheckBudget) -> Result<LawReport> {
    let mut rep = LawReport::new();
    let objects = doc.objects();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x5eed);
    let mut fail = None;
    for x in &objects {
        for y in &objects {
            for z in &objects {
                for f in doc.arrows(y, z, budget.hom_cap)?.iter().take(8) {
                    let gf = graph(doc, f)?;
                    for _ in 0..budget.samples.min(20) {
                        let a = doc.fibre_sample(x, y, &mut rng);
                        let b = doc.fibre_sample(x, z, &mut rng);
                        let lhs = doc
                            .rel_meet(&doc.comp(&a, &gf)?, &b)
                            .ok_or_else(|| DocError::PreconditionFailed("no meets".into()))?;
                        let inner = doc
                            .rel_meet(&a, &doc.comp(&b, &doc.conv(&gf))?)
                            .unwrap();
                        let rhs = doc.comp(&inner, &gf)?;
                        if !doc.rel_eq(&lhs, &rhs)? {
                            fail.get_or_insert_with(|| {
                                format!("{} along {}", doc.rel_label(&a), doc.arr_label(f))
                            });
                        }
                    }
                }
            }
        }
    }
    let scope = format!("{} over {} objects", doc.tag(), objects.len());
    rep.record("frobenius-law", &scope, fail.is_none(), || {
        fail.clone().unwrap()
    });
    Ok(rep)
}

/// Restriction along a projection commutes with padding by an identity:
/// `a ; gr p1 conv = gr p1 conv ; (a [x] d)`.
pub fn check_beck_chevalley<D>(doc: &D, budget: &CheckBudget) -> Result<LawReport>
where
    D: Doctrine + CartesianBase,
{
    let mut rep = LawReport::new();
    let objects = doc.objects();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0xbc);
    let mut fail = None;
    for x in &objects {
        for y in &objects {
            for w in &objects {
                let (_, py, _) = doc.product(y, w)?;
                let (_, px, _) = doc.product(x, w)?;
                for _ in 0..budget.samples.min(20) {
                    let a = doc.fibre_sample(x, y, &mut rng);
                    let lhs = doc.comp(&a, &doc.conv(&graph(doc, &py)?))?;
                    let rhs = doc.comp(
                        &doc.conv(&graph(doc, &px)?),
                        &box_product(doc, &a, &doc.d(w))?,
                    )?;
                    if !doc.rel_eq(&lhs, &rhs)? {
                        fail.get_or_insert_with(|| doc.rel_label(&a));
                    }
                }
            }
        }
    }
    let scope = format!("{} over {} objects", doc.tag(), objects.len());
    rep.record("pad-then-project", &scope, fail.is_none(), || {
        fail.clone().unwrap()
    });
    Ok(rep)
}

/// The modular law `(a ; c) /\ b <= (a /\ (b ; c conv)) ; c`. Fibres are
/// scanned exhaustively when enumerable, else sampled; the witness is the
/// first violating triple in scan order.
pub fn check_modular<D: Doctrine>(
    doc: &D,
    budget: &CheckBudget,
) -> Result<(bool, Option<String>)> {
    let objects = doc.objects();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for x in &objects {
        for y in &objects {
            let xy = pool(doc, x, y, budget, &mut rng)?;
            for z in &objects {
                let xz = pool(doc, x, z, budget, &mut rng)?;
                let yz = pool(doc, y, z, budget, &mut rng)?;
                for a in &xy {
                    for b in &xz {
                        for c in &yz {
                            let lhs = doc
                                .rel_meet(&doc.comp(a, c)?, b)
                                .ok_or_else(|| {
                                    DocError::PreconditionFailed("no fibre meets".to_string())
                                })?;
                            let inner =
                                doc.rel_meet(a, &doc.comp(b, &doc.conv(c))?).unwrap();
                            let rhs = doc.comp(&inner, c)?;
                            if !doc.rel_leq(&lhs, &rhs)? {
                                return Ok((
                                    false,
                                    Some(format!(
                                        "alpha={}, beta={}, gamma={} over ({},{},{})",
                                        doc.rel_label(a),
                                        doc.rel_label(b),
                                        doc.rel_label(c),
                                        doc.obj_label(x),
                                        doc.obj_label(y),
                                        doc.obj_label(z),
                                    )),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((true, None))
}

/// A one-object doctrine whose single fibre is the four-element diamond
/// `00 < 01, 10 < 11`, with meet as composition, bit swap as converse
/// and the top as identity. All doctrine laws hold, the modular law does
/// not.
pub fn build_h_counterexample() -> Result<PresentedDoctrine> {
    let fibre = PresFibre {
        names: vec!["00".into(), "01".into(), "10".into(), "11".into()],
        leq: (0..4)
            .flat_map(|i| (0..4).map(move |j| i & j == i))
            .collect(),
    };
    let comp: Vec<usize> = (0..4).flat_map(|i| (0..4).map(move |j| i & j)).collect();
    let swap = vec![0, 2, 1, 3];
    PresentedDoctrine::new(
        PresentedBase::point(),
        BTreeMap::from([((0, 0), fibre)]),
        vec![3],
        BTreeMap::from([((0, 0, 0), comp)]),
        BTreeMap::from([((0, 0), swap)]),
        BTreeMap::from([((0, 0), vec![0, 1, 2, 3])]),
    )
}

// ---------------------------------------------------------------------------
// Relations as predicates on a product
// ---------------------------------------------------------------------------

/// Send a relation to the predicate on the product:
/// `(a [x] d) ; gr diag conv ; gr bang`.
pub fn phi<D>(doc: &D, a: &D::R) -> Result<D::R>
where
    D: Doctrine + CartesianBase,
{
    let y = doc.rel_cod(a);
    let boxed = box_product(doc, a, &doc.d(&y))?;
    let gd = graph(doc, &doc.diagonal(&y)?)?;
    let gb = graph(doc, &doc.bang(&y)?)?;
    doc.comp(&doc.comp(&boxed, &doc.conv(&gd))?, &gb)
}

/// Recover a relation from a predicate on the product. The middle leg
/// re-associates by pairing the product with its own second projection,
/// so the padded predicate can be composed down to the codomain.
pub fn psi<D>(doc: &D, x: &D::O, y: &D::O, b: &D::R) -> Result<D::R>
where
    D: Doctrine + CartesianBase,
{
    let (xy, p1, p2) = doc.product(x, y)?;
    if !doc.obj_eq(&doc.rel_dom(b), &xy) || !doc.obj_eq(&doc.rel_cod(b), &doc.terminal()?) {
        return Err(DocError::ShapeMismatch(
            "predicate must run from the product to the terminal".to_string(),
        ));
    }
    let dup = doc.tuple(&doc.id_arr(&xy), &p2)?;
    let boxed = box_product(doc, b, &doc.d(y))?;
    let (_, _, q2) = doc.product(&doc.terminal()?, y)?;
    let up = doc.comp(&doc.conv(&graph(doc, &p1)?), &graph(doc, &dup)?)?;
    doc.comp(&doc.comp(&up, &boxed)?, &graph(doc, &q2)?)
}

/// The two translations are inverse order-embeddings, and the predicate
/// side sees meets and converse (through the swap map). Requires the
/// modular law; doctrines that break it are rejected.
pub fn check_predicate_correspondence<D>(doc: &D, budget: &CheckBudget) -> Result<LawReport>
where
    D: Doctrine + CartesianBase,
{
    let (modular, w) = check_modular(doc, budget)?;
    if !modular {
        return Err(DocError::PreconditionFailed(format!(
            "the modular law fails: {}",
            w.unwrap_or_default()
        )));
    }
    let mut rep = LawReport::new();
    let objects = doc.objects();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x9d);
    let mut fails: BTreeMap<&'static str, String> = BTreeMap::new();
    for x in &objects {
        for y in &objects {
            let (xy, _, _) = doc.product(x, y)?;
            let one = doc.terminal()?;
            // Swap map from the opposite product onto this one.
            let (_, r1, r2) = doc.product(y, x)?;
            let swap = graph(doc, &doc.tuple(&r2, &r1)?)?;
            let pairs: Vec<_> = (0..budget.samples.min(24))
                .map(|_| {
                    (
                        doc.fibre_sample(x, y, &mut rng),
                        doc.fibre_sample(x, y, &mut rng),
                    )
                })
                .collect();
            for (a, a2) in &pairs {
                let pa = phi(doc, a)?;
                if !doc.rel_eq(&psi(doc, x, y, &pa)?, a)? {
                    fails
                        .entry("predicate-roundtrip")
                        .or_insert_with(|| doc.rel_label(a));
                }
                let pa2 = phi(doc, a2)?;
                if doc.rel_leq(a, a2)? != doc.rel_leq(&pa, &pa2)? {
                    fails
                        .entry("predicate-order-embedding")
                        .or_insert_with(|| doc.rel_label(a));
                }
                let pm = phi(doc, &doc.rel_meet(a, a2).unwrap())?;
                if !doc.rel_eq(&pm, &doc.rel_meet(&pa, &pa2).unwrap())? {
                    fails
                        .entry("predicate-preserves-meets")
                        .or_insert_with(|| doc.rel_label(a));
                }
                let swapped = doc.comp(&swap, &pa)?;
                if !doc.rel_eq(&phi(doc, &doc.conv(a))?, &swapped)? {
                    fails
                        .entry("predicate-tracks-converse")
                        .or_insert_with(|| doc.rel_label(a));
                }
            }
            // The other composite: start from a predicate.
            for _ in 0..budget.samples.min(24) {
                let b = doc.fibre_sample(&xy, &one, &mut rng);
                if !doc.rel_eq(&phi(doc, &psi(doc, x, y, &b)?)?, &b)? {
                    fails
                        .entry("relation-roundtrip")
                        .or_insert_with(|| doc.rel_label(&b));
                }
            }
        }
    }
    let scope = format!("{} over {} objects", doc.tag(), objects.len());
    for law in [
        "predicate-roundtrip",
        "relation-roundtrip",
        "predicate-order-embedding",
        "predicate-preserves-meets",
        "predicate-tracks-converse",
    ] {
        rep.record(law, &scope, !fails.contains_key(law), || fails[law].clone());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doctrine::{
        check_doctrine_laws, terminal_obj, FinRel, FinSetObj, VRelDoctrine,
    };
    use crate::extensional::is_extensional;
    use crate::valuealg::{QuantaleSpec, Value};

    fn bool_doc() -> VRelDoctrine {
        let x = FinSetObj::new("X", vec!["a".into(), "b".into()]).unwrap();
        let y = FinSetObj::new("Y", vec!["u".into(), "v".into()]).unwrap();
        VRelDoctrine::boolean(vec![x, y])
    }

    #[test]
    fn diamond_tables_form_a_doctrine_but_break_the_modular_law() {
        let h = build_h_counterexample().unwrap();
        let rep = check_doctrine_laws(&h, &CheckBudget::default()).unwrap();
        assert!(rep.all_passed(), "{rep}");
        let (ok, w) = check_modular(&h, &CheckBudget::default()).unwrap();
        assert!(!ok);
        assert_eq!(
            w.unwrap(),
            "alpha=01, beta=01, gamma=01 over (*,*,*)",
            "first violation in scan order"
        );
        // The designated witness triple, evaluated directly.
        let a = crate::doctrine::PRel { dom: 0, cod: 0, idx: 1 };
        let b = crate::doctrine::PRel { dom: 0, cod: 0, idx: 3 };
        let c = crate::doctrine::PRel { dom: 0, cod: 0, idx: 1 };
        let lhs = h.rel_meet(&h.comp(&a, &c).unwrap(), &b).unwrap();
        let inner = h.rel_meet(&a, &h.comp(&b, &h.conv(&c)).unwrap()).unwrap();
        let rhs = h.comp(&inner, &c).unwrap();
        assert_eq!(h.rel_label(&lhs), "01");
        assert_eq!(h.rel_label(&rhs), "00");
        assert!(!h.rel_leq(&lhs, &rhs).unwrap());
        // No predicate correspondence without the modular law.
        assert!(matches!(
            check_predicate_correspondence(&h, &CheckBudget::default()),
            Err(DocError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn boolean_relations_are_modular_frobenius_and_projection_stable() {
        let doc = bool_doc();
        let budget = CheckBudget::default();
        let (ok, w) = check_modular(&doc, &budget).unwrap();
        assert!(ok, "witness: {w:?}");
        assert!(check_frobenius(&doc, &budget).unwrap().all_passed());
        assert!(check_beck_chevalley(&doc, &budget).unwrap().all_passed());
        assert!(check_ordered(&doc, &budget).unwrap().all_passed());
        assert!(check_maps_category(&doc, &budget).unwrap().all_passed());
    }

    #[test]
    fn cartesian_structure_holds_and_interchange_is_only_lax_for_distances() {
        let doc = bool_doc();
        let rep = check_cartesian(&doc, &CheckBudget::default()).unwrap();
        assert!(rep.all_passed(), "{rep}");

        let one = terminal_obj();
        let q = QuantaleSpec::lawvere(crate::valuealg::DEFAULT_EPS).unwrap();
        let lv = VRelDoctrine::new(q, vec![one.clone()]);
        let rep = check_cartesian(&lv, &CheckBudget::default()).unwrap();
        assert!(rep.entry("product-interchange-lax").unwrap().passed);
        assert!(!rep.entry("product-interchange-strict").unwrap().passed);

        // Scalar witness: composing products of scalars adds the maxima,
        // 2, while the product of the composites is the max of sums, 1.
        let scalar = |v: f64| FinRel::new(one.clone(), one.clone(), vec![Value::Num(v)]).unwrap();
        let (a, b, c, e) = (scalar(0.0), scalar(1.0), scalar(1.0), scalar(0.0));
        let lhs = lv
            .comp(
                &box_product(&lv, &a, &b).unwrap(),
                &box_product(&lv, &c, &e).unwrap(),
            )
            .unwrap();
        let rhs = box_product(&lv, &lv.comp(&a, &c).unwrap(), &lv.comp(&b, &e).unwrap()).unwrap();
        assert_eq!(lhs.get(0, 0), Value::Num(2.0));
        assert_eq!(rhs.get(0, 0), Value::Num(1.0));
        assert!(lv.rel_leq(&lhs, &rhs).unwrap());
        assert!(!lv.rel_eq(&lhs, &rhs).unwrap());

        // Distances also break the modular law, already on scalars.
        let (ok, w) = check_modular(&lv, &CheckBudget::default()).unwrap();
        assert!(!ok, "witness: {w:?}");
    }

    #[test]
    fn unique_choice_fails_over_subsets_and_recovers_over_the_map_base() {
        let one = terminal_obj();
        let a = FinSetObj::new("A", vec!["a".into(), "b".into()]).unwrap();
        let q = QuantaleSpec::powerset(&["u".to_string(), "v".to_string()]).unwrap();
        let doc = VRelDoctrine::new(q, vec![one.clone(), a.clone()]);
        let (ok, w) = check_ruc(&doc, &one, &a, 100_000).unwrap();
        assert!(!ok);
        // First functional total non-graph in enumeration order: the
        // element whose two values are the disjoint singletons.
        let expected =
            FinRel::new(one.clone(), a.clone(), vec![Value::Idx(1), Value::Idx(2)]).unwrap();
        assert_eq!(w.unwrap(), doc.rel_label(&expected));
        assert!(is_functional(&doc, &expected).unwrap());
        assert!(is_total(&doc, &expected).unwrap());

        // Booleans satisfy unique choice outright.
        let bd = bool_doc();
        let (ok, w) = check_ruc_all(&bd, 100_000).unwrap();
        assert!(ok, "witness: {w:?}");

        // Over the base of maps the same fibre element is its own graph.
        let rmap = rmap_doctrine(doc);
        let (ok, w) = check_ruc_all(&rmap, 100_000).unwrap();
        assert!(ok, "witness: {w:?}");
    }

    #[test]
    fn map_base_doctrine_passes_the_laws_and_is_extensional() {
        let rmap = rmap_doctrine(bool_doc());
        let rep = check_doctrine_laws(&rmap, &CheckBudget::default()).unwrap();
        assert!(rep.all_passed(), "{rep}");
        let (ext, w) = is_extensional(&rmap, &rmap.objects(), 100_000).unwrap();
        assert!(ext, "witness: {w:?}");
        // Reindexing along a non-map is refused.
        let x = rmap.objects()[0].clone();
        let top = rmap.rel_top(&x, &x).unwrap();
        let bad = MapArr { rel: top.clone() };
        assert!(matches!(
            rmap.reindex(&bad, &bad, &top),
            Err(DocError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn predicates_on_the_product_mirror_relations() {
        let doc = bool_doc();
        let rep = check_predicate_correspondence(&doc, &CheckBudget::default()).unwrap();
        assert!(rep.all_passed(), "{rep}");

        // Pointwise content of the translation, on a pinned relation.
        let x = doc.objects[0].clone();
        let y = doc.objects[1].clone();
        let a = FinRel::new(
            x.clone(),
            y.clone(),
            vec![Value::Idx(1), Value::Idx(0), Value::Idx(1), Value::Idx(1)],
        )
        .unwrap();
        let p = phi(&doc, &a).unwrap();
        let (xy, _, _) = doc.product(&x, &y).unwrap();
        assert_eq!(p.dom, xy);
        assert_eq!(p.cod, terminal_obj());
        for i in 0..x.len() {
            for j in 0..y.len() {
                assert_eq!(p.get(i * y.len() + j, 0), a.get(i, j));
            }
        }
        let back = psi(&doc, &x, &y, &p).unwrap();
        assert!(doc.rel_eq(&back, &a).unwrap());
    }
}
