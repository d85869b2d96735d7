//! Quotient completion: equivalence-carrying objects, descent fibres,
//! canonical quotient arrows and their certificates.
//!
//! An object of the completed doctrine is a base object together with a
//! fibre equivalence on it; relations between two such objects are the
//! descent data, i.e. fibre elements absorbing the two equivalences.
//! The completion is a 2-monad whose unit equips an object with its
//! identity relation and whose multiplication flattens nested
//! equivalences; the lax-idempotency witnesses are checked here by
//! [`check_kzd`].

use crate::doctrine::{
    graph, is_surjective, CheckBudget, Doctrine, FinMap, FinRel, FinSetObj, ObjRef, VRelDoctrine,
};
use crate::lifting::{check_two_arrow, Lifting, TwoArrow};
use crate::{DocError, LawReport, Result};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Fibre equivalences
// ---------------------------------------------------------------------------

/// Why an endo fibre element fails to be an equivalence, if it does.
pub fn check_equivalence<D: Doctrine>(doc: &D, rho: &D::R) -> Result<()> {
    let x = doc.rel_dom(rho);
    if !doc.obj_eq(&x, &doc.rel_cod(rho)) {
        return Err(DocError::NotEquivalence(format!(
            "{} is not an endo relation",
            doc.rel_label(rho)
        )));
    }
    if !doc.rel_leq(&doc.d(&x), rho)? {
        return Err(DocError::NotEquivalence(format!(
            "{} is not reflexive",
            doc.rel_label(rho)
        )));
    }
    if !doc.rel_leq(&doc.conv(rho), rho)? {
        return Err(DocError::NotEquivalence(format!(
            "{} is not symmetric",
            doc.rel_label(rho)
        )));
    }
    if !doc.rel_leq(&doc.comp(rho, rho)?, rho)? {
        return Err(DocError::NotEquivalence(format!(
            "{} is not transitive",
            doc.rel_label(rho)
        )));
    }
    Ok(())
}

pub fn is_equivalence<D: Doctrine>(doc: &D, rho: &D::R) -> Result<bool> {
    match check_equivalence(doc, rho) {
        Ok(()) => Ok(true),
        Err(DocError::NotEquivalence(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// A base object carrying a fibre equivalence.
#[derive(Clone, Debug)]
pub struct QrObj<D: Doctrine> {
    pub base: D::O,
    pub rho: D::R,
}

/// A carrier set with a distance-style equivalence over a value
/// quantale. The validated constructor is [`vmetric`].
pub type VMetricSpace = QrObj<VRelDoctrine>;

/// Build a validated equivalence-carrying space over a matrix doctrine.
pub fn vmetric(doc: &VRelDoctrine, carrier: &ObjRef, rho: FinRel) -> Result<VMetricSpace> {
    if rho.dom != *carrier || rho.cod != *carrier {
        return Err(DocError::ShapeMismatch(format!(
            "equivalence endpoints must both be {}",
            carrier.name
        )));
    }
    check_equivalence(doc, &rho)?;
    Ok(QrObj {
        base: carrier.clone(),
        rho,
    })
}

#[derive(Clone, Debug)]
pub struct QrArr<D: Doctrine> {
    pub dom: QrObj<D>,
    pub cod: QrObj<D>,
    pub map: D::A,
}

#[derive(Clone, Debug)]
pub struct QrRel<D: Doctrine> {
    pub dom: QrObj<D>,
    pub cod: QrObj<D>,
    pub rel: D::R,
}

// ---------------------------------------------------------------------------
// The completed doctrine
// ---------------------------------------------------------------------------

/// The quotient completion of a doctrine: objects carry equivalences,
/// arrows are base arrows respecting them, fibres are descent data.
#[derive(Clone, Debug)]
pub struct QrDoctrine<D: Doctrine> {
    pub base: D,
    pub objects: Vec<QrObj<D>>,
}

impl<D: Doctrine> QrDoctrine<D> {
    /// Least descent datum above a base fibre element.
    pub fn descent_closure(&self, x: &QrObj<D>, y: &QrObj<D>, rel: &D::R) -> Result<D::R> {
        self.base
            .comp(&self.base.comp(&self.base.conv(&x.rho), rel)?, &y.rho)
    }

    pub fn is_descent_datum(&self, x: &QrObj<D>, y: &QrObj<D>, rel: &D::R) -> Result<bool> {
        self.base
            .rel_leq(&self.descent_closure(x, y, rel)?, rel)
    }

    fn arrow_compatible(&self, f: &D::A, x: &QrObj<D>, y: &QrObj<D>) -> Result<bool> {
        self.base
            .rel_leq(&x.rho, &self.base.reindex(f, f, &y.rho)?)
    }
}

/// Validated construction: every listed object must carry an equivalence.
pub fn qr_completion<D: Doctrine>(base: D, objects: Vec<QrObj<D>>) -> Result<QrDoctrine<D>> {
    for o in &objects {
        check_equivalence(&base, &o.rho)?;
    }
    Ok(QrDoctrine { base, objects })
}

/// Equip an object with its identity relation (the completion's unit on
/// objects).
pub fn discrete_obj<D: Doctrine>(doc: &D, x: &D::O) -> QrObj<D> {
    QrObj {
        base: x.clone(),
        rho: doc.d(x),
    }
}

impl<D: Doctrine> Doctrine for QrDoctrine<D> {
    type O = QrObj<D>;
    type A = QrArr<D>;
    type R = QrRel<D>;

    fn tag(&self) -> &'static str {
        "quotient-completion"
    }

    fn objects(&self) -> Vec<QrObj<D>> {
        self.objects.clone()
    }

    fn obj_eq(&self, x: &QrObj<D>, y: &QrObj<D>) -> bool {
        self.base.obj_eq(&x.base, &y.base)
            && self.base.rel_eq(&x.rho, &y.rho).unwrap_or(false)
    }

    fn obj_label(&self, x: &QrObj<D>) -> String {
        format!(
            "<{} | {}>",
            self.base.obj_label(&x.base),
            self.base.rel_label(&x.rho)
        )
    }

    fn check_obj(&self, x: &QrObj<D>) -> Result<()> {
        self.base.check_obj(&x.base)?;
        check_equivalence(&self.base, &x.rho)
    }

    fn arrows(&self, x: &QrObj<D>, y: &QrObj<D>, cap: usize) -> Result<Vec<QrArr<D>>> {
        let mut out = Vec::new();
        for f in self.base.arrows(&x.base, &y.base, cap)? {
            if self.arrow_compatible(&f, x, y)? {
                out.push(QrArr {
                    dom: x.clone(),
                    cod: y.clone(),
                    map: f,
                });
            }
        }
        Ok(out)
    }

    fn arr_dom(&self, f: &QrArr<D>) -> QrObj<D> {
        f.dom.clone()
    }

    fn arr_cod(&self, f: &QrArr<D>) -> QrObj<D> {
        f.cod.clone()
    }

    fn arr_eq(&self, f: &QrArr<D>, g: &QrArr<D>) -> bool {
        self.obj_eq(&f.dom, &g.dom)
            && self.obj_eq(&f.cod, &g.cod)
            && self.base.arr_eq(&f.map, &g.map)
    }

    fn id_arr(&self, x: &QrObj<D>) -> QrArr<D> {
        QrArr {
            dom: x.clone(),
            cod: x.clone(),
            map: self.base.id_arr(&x.base),
        }
    }

    fn then_arr(&self, f: &QrArr<D>, g: &QrArr<D>) -> Result<QrArr<D>> {
        if !self.obj_eq(&f.cod, &g.dom) {
            return Err(DocError::ShapeMismatch(
                "arrows do not compose in the completion".to_string(),
            ));
        }
        Ok(QrArr {
            dom: f.dom.clone(),
            cod: g.cod.clone(),
            map: self.base.then_arr(&f.map, &g.map)?,
        })
    }

    fn arr_label(&self, f: &QrArr<D>) -> String {
        format!(
            "{}: {} -> {}",
            self.base.arr_label(&f.map),
            self.obj_label(&f.dom),
            self.obj_label(&f.cod)
        )
    }

    fn rel_dom(&self, a: &QrRel<D>) -> QrObj<D> {
        a.dom.clone()
    }

    fn rel_cod(&self, a: &QrRel<D>) -> QrObj<D> {
        a.cod.clone()
    }

    fn rel_leq(&self, a: &QrRel<D>, b: &QrRel<D>) -> Result<bool> {
        if !self.obj_eq(&a.dom, &b.dom) || !self.obj_eq(&a.cod, &b.cod) {
            return Err(DocError::ShapeMismatch("completion fibre order".to_string()));
        }
        self.base.rel_leq(&a.rel, &b.rel)
    }

    fn d(&self, x: &QrObj<D>) -> QrRel<D> {
        QrRel {
            dom: x.clone(),
            cod: x.clone(),
            rel: x.rho.clone(),
        }
    }

    fn comp(&self, a: &QrRel<D>, b: &QrRel<D>) -> Result<QrRel<D>> {
        if !self.obj_eq(&a.cod, &b.dom) {
            return Err(DocError::ShapeMismatch(
                "completion fibre composition".to_string(),
            ));
        }
        Ok(QrRel {
            dom: a.dom.clone(),
            cod: b.cod.clone(),
            rel: self.base.comp(&a.rel, &b.rel)?,
        })
    }

    fn conv(&self, a: &QrRel<D>) -> QrRel<D> {
        QrRel {
            dom: a.cod.clone(),
            cod: a.dom.clone(),
            rel: self.base.conv(&a.rel),
        }
    }

    fn reindex(&self, f: &QrArr<D>, g: &QrArr<D>, a: &QrRel<D>) -> Result<QrRel<D>> {
        if !self.obj_eq(&f.cod, &a.dom) || !self.obj_eq(&g.cod, &a.cod) {
            return Err(DocError::ShapeMismatch("completion reindex".to_string()));
        }
        Ok(QrRel {
            dom: f.dom.clone(),
            cod: g.dom.clone(),
            rel: self.base.reindex(&f.map, &g.map, &a.rel)?,
        })
    }

    fn rel_label(&self, a: &QrRel<D>) -> String {
        self.base.rel_label(&a.rel)
    }

    fn fibre_enum(&self, x: &QrObj<D>, y: &QrObj<D>, cap: usize) -> Result<Option<Vec<QrRel<D>>>> {
        let all = match self.base.fibre_enum(&x.base, &y.base, cap)? {
            Some(v) => v,
            None => return Ok(None),
        };
        let mut out = Vec::new();
        for rel in all {
            if self.is_descent_datum(x, y, &rel)? {
                out.push(QrRel {
                    dom: x.clone(),
                    cod: y.clone(),
                    rel,
                });
            }
        }
        Ok(Some(out))
    }

    fn fibre_sample(&self, x: &QrObj<D>, y: &QrObj<D>, rng: &mut ChaCha8Rng) -> QrRel<D> {
        let raw = self.base.fibre_sample(&x.base, &y.base, rng);
        let rel = self
            .descent_closure(x, y, &raw)
            .expect("closure of a well-shaped sample");
        QrRel {
            dom: x.clone(),
            cod: y.clone(),
            rel,
        }
    }

    fn rel_meet(&self, a: &QrRel<D>, b: &QrRel<D>) -> Option<QrRel<D>> {
        if !self.obj_eq(&a.dom, &b.dom) || !self.obj_eq(&a.cod, &b.cod) {
            return None;
        }
        // Descent data are closed under fibre meets.
        self.base.rel_meet(&a.rel, &b.rel).map(|rel| QrRel {
            dom: a.dom.clone(),
            cod: a.cod.clone(),
            rel,
        })
    }

    fn rel_join(&self, a: &QrRel<D>, b: &QrRel<D>) -> Option<QrRel<D>> {
        if !self.obj_eq(&a.dom, &b.dom) || !self.obj_eq(&a.cod, &b.cod) {
            return None;
        }
        self.base.rel_join(&a.rel, &b.rel).map(|rel| QrRel {
            dom: a.dom.clone(),
            cod: a.cod.clone(),
            rel,
        })
    }

    fn rel_top(&self, x: &QrObj<D>, y: &QrObj<D>) -> Option<QrRel<D>> {
        self.base.rel_top(&x.base, &y.base).map(|rel| QrRel {
            dom: x.clone(),
            cod: y.clone(),
            rel,
        })
    }

    fn rel_bot(&self, x: &QrObj<D>, y: &QrObj<D>) -> Option<QrRel<D>> {
        // The bottom element absorbs both equivalences, so it is descent.
        self.base.rel_bot(&x.base, &y.base).map(|rel| QrRel {
            dom: x.clone(),
            cod: y.clone(),
            rel,
        })
    }
}

/// The canonical coarsening arrow `<X, rho> -> <X, sigma>` on the same
/// carrier, defined when `rho <= sigma`.
pub fn qr_quotient_arrow<D: Doctrine>(
    qr: &QrDoctrine<D>,
    x: &QrObj<D>,
    y: &QrObj<D>,
) -> Result<QrArr<D>> {
    if !qr.base.obj_eq(&x.base, &y.base) {
        return Err(DocError::ShapeMismatch(
            "coarsening needs a shared carrier".to_string(),
        ));
    }
    if !qr.base.rel_leq(&x.rho, &y.rho)? {
        return Err(DocError::NotCoarser(format!(
            "{} is not below {}",
            qr.base.rel_label(&x.rho),
            qr.base.rel_label(&y.rho)
        )));
    }
    Ok(QrArr {
        dom: x.clone(),
        cod: y.clone(),
        map: qr.base.id_arr(&x.base),
    })
}

// ---------------------------------------------------------------------------
// Quotient certificates
// ---------------------------------------------------------------------------

/// What a candidate quotient arrow turned out to be.
#[derive(Clone, Debug)]
pub struct QuotientCert {
    /// Identifies the equivalence and is universal among compatible
    /// arrows into the probe objects.
    pub is_quotient: bool,
    /// The kernel of the arrow equals the equivalence exactly.
    pub effective: bool,
    /// The graph of the arrow is surjective.
    pub descent: bool,
    pub probe_scope: String,
    pub failure: Option<String>,
}

fn universality<D: Doctrine>(
    doc: &D,
    q: &D::A,
    rho: &D::R,
    probes: &[D::O],
    budget: &CheckBudget,
) -> Result<Option<String>> {
    let x = doc.arr_dom(q);
    let y = doc.arr_cod(q);
    for z in probes {
        for f in doc.arrows(&x, z, budget.hom_cap)? {
            let ker_f = crate::doctrine::kernel(doc, &f)?;
            if !doc.rel_leq(rho, &ker_f)? {
                continue;
            }
            let mut matches = 0usize;
            for h in doc.arrows(&y, z, budget.hom_cap)? {
                if doc.arr_eq(&doc.then_arr(q, &h)?, &f) {
                    matches += 1;
                }
            }
            if matches != 1 {
                return Ok(Some(format!(
                    "compatible arrow {} has {matches} factorisations through the candidate",
                    doc.arr_label(&f)
                )));
            }
        }
    }
    Ok(None)
}

/// Certify a candidate quotient arrow for an equivalence on its domain.
pub fn quotient_cert<D: Doctrine>(
    doc: &D,
    q: &D::A,
    rho: &D::R,
    probes: &[D::O],
    budget: &CheckBudget,
) -> Result<QuotientCert> {
    check_equivalence(doc, rho)?;
    let x = doc.arr_dom(q);
    if !doc.obj_eq(&x, &doc.rel_dom(rho)) {
        return Err(DocError::ShapeMismatch(
            "equivalence must live on the arrow's domain".to_string(),
        ));
    }
    let gq = graph(doc, q)?;
    let ker = doc.comp(&gq, &doc.conv(&gq))?;
    let mut failure = None;
    let mut is_quotient = true;
    if !doc.rel_leq(rho, &ker)? {
        is_quotient = false;
        failure = Some("the arrow does not identify the equivalence".to_string());
    }
    if is_quotient {
        if let Some(w) = universality(doc, q, rho, probes, budget)? {
            is_quotient = false;
            failure = Some(w);
        }
    }
    let effective = doc.rel_eq(&ker, rho)?;
    let descent = is_surjective(doc, &gq)?;
    if failure.is_none() && !descent {
        failure = Some("the graph of the arrow is not surjective".to_string());
    }
    Ok(QuotientCert {
        is_quotient,
        effective,
        descent,
        probe_scope: format!("{} probes", probes.len()),
        failure,
    })
}

pub fn is_effective<D: Doctrine>(doc: &D, q: &D::A, rho: &D::R) -> Result<bool> {
    doc.rel_eq(&crate::doctrine::kernel(doc, q)?, rho)
}

/// A quotient arrow is descent when its graph is surjective.
pub fn is_descent<D: Doctrine>(doc: &D, q: &D::A) -> Result<bool> {
    is_surjective(doc, &graph(doc, q)?)
}

// ---------------------------------------------------------------------------
// Canonical quotients of matrix equivalences
// ---------------------------------------------------------------------------

/// A constructed quotient map together with bookkeeping about it.
#[derive(Clone, Debug)]
pub struct BuiltQuotient {
    pub map: FinMap,
    /// Classes merged beyond directly non-bottom pairs: the forced
    /// identification relation needed a transitive closure (possible in
    /// quantales with zero divisors).
    pub closure_added: bool,
}

/// Build the universal quotient of an equivalence in a matrix doctrine.
///
/// Every map kernel is `{unit, bottom}`-valued, so a compatible map is
/// forced to identify exactly the pairs on which the equivalence is not
/// bottom; the quotient identifies the transitive closure of those
/// pairs. Class representatives are least carrier indices and name the
/// classes.
pub fn build_quotient_vrel(doc: &VRelDoctrine, space: &VMetricSpace) -> Result<BuiltQuotient> {
    check_equivalence(doc, &space.rho)?;
    let x = &space.base;
    let n = x.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let mut closure_added = false;
    for i in 0..n {
        for j in 0..n {
            if !doc.q.is_bottom(space.rho.get(i, j)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    // Detect whether the closure identified any bottom pair.
    for i in 0..n {
        for j in 0..n {
            if doc.q.is_bottom(space.rho.get(i, j))
                && find(&mut parent, i) == find(&mut parent, j)
            {
                closure_added = true;
            }
        }
    }
    let mut reps: Vec<usize> = Vec::new();
    let mut class_of = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match reps.iter().position(|&p| p == r) {
            Some(c) => class_of[i] = c,
            None => {
                reps.push(r);
                class_of[i] = reps.len() - 1;
            }
        }
    }
    let labels = reps
        .iter()
        .map(|&r| format!("[{}]", x.elements[r]))
        .collect();
    let y = FinSetObj::new(&format!("{}/~", x.name), labels)?;
    let map = FinMap::new(x.clone(), y, class_of)?;
    Ok(BuiltQuotient { map, closure_added })
}

/// Factor a map through its kernel classes: a surjective quotient map
/// followed by an injective inclusion.
pub fn factorize(doc: &VRelDoctrine, f: &FinMap) -> Result<(FinMap, FinMap)> {
    let ker = crate::doctrine::kernel(doc, f)?;
    let space = vmetric(doc, &f.dom, ker)?;
    let built = build_quotient_vrel(doc, &space)?;
    let q = built.map;
    // One representative per class picks the inclusion's value.
    let mut incl = vec![usize::MAX; q.cod.len()];
    for i in 0..f.dom.len() {
        let c = q.apply(i);
        if incl[c] == usize::MAX {
            incl[c] = f.apply(i);
        }
    }
    let i = FinMap::new(q.cod.clone(), f.cod.clone(), incl)?;
    Ok((q, i))
}

// ---------------------------------------------------------------------------
// Unit and multiplication of the completion
// ---------------------------------------------------------------------------

/// Unit of the completion: equip everything with identities.
#[derive(Clone, Debug)]
pub struct UnitLifting<D: Doctrine> {
    pub base: D,
    pub qr: QrDoctrine<D>,
}

pub fn unit_lifting<D: Doctrine>(base: &D) -> UnitLifting<D> {
    let objects = base
        .objects()
        .iter()
        .map(|x| discrete_obj(base, x))
        .collect();
    UnitLifting {
        base: base.clone(),
        qr: QrDoctrine {
            base: base.clone(),
            objects,
        },
    }
}

impl<D: Doctrine> Lifting for UnitLifting<D> {
    type Src = D;
    type Tgt = QrDoctrine<D>;

    fn src(&self) -> &D {
        &self.base
    }

    fn tgt(&self) -> &QrDoctrine<D> {
        &self.qr
    }

    fn name(&self) -> String {
        "completion-unit".to_string()
    }

    fn strict(&self) -> bool {
        true
    }

    fn on_obj(&self, x: &D::O) -> Result<QrObj<D>> {
        Ok(discrete_obj(&self.base, x))
    }

    fn on_arr(&self, f: &D::A) -> Result<QrArr<D>> {
        Ok(QrArr {
            dom: discrete_obj(&self.base, &self.base.arr_dom(f)),
            cod: discrete_obj(&self.base, &self.base.arr_cod(f)),
            map: f.clone(),
        })
    }

    fn on_rel(&self, a: &D::R) -> Result<QrRel<D>> {
        Ok(QrRel {
            dom: discrete_obj(&self.base, &self.base.rel_dom(a)),
            cod: discrete_obj(&self.base, &self.base.rel_cod(a)),
            rel: a.clone(),
        })
    }
}

/// Multiplication of the completion: flatten a nested equivalence onto
/// the underlying carrier.
#[derive(Clone, Debug)]
pub struct MultLifting<D: Doctrine> {
    pub src: QrDoctrine<QrDoctrine<D>>,
    pub tgt: QrDoctrine<D>,
}

fn flatten_obj<D: Doctrine>(w: &QrObj<QrDoctrine<D>>) -> QrObj<D> {
    QrObj {
        base: w.base.base.clone(),
        rho: w.rho.rel.clone(),
    }
}

pub fn mult_lifting<D: Doctrine>(qr: &QrDoctrine<D>) -> MultLifting<D> {
    // Register both canonical nestings of each object: the discrete
    // carrier under the equivalence, and the quotiented carrier under
    // its own identity.
    let mut objects = Vec::new();
    let inner = QrDoctrine {
        base: qr.base.clone(),
        objects: vec![],
    };
    for w in &qr.objects {
        let disc = discrete_obj(&qr.base, &w.base);
        objects.push(QrObj {
            base: disc.clone(),
            rho: QrRel {
                dom: disc.clone(),
                cod: disc,
                rel: w.rho.clone(),
            },
        });
        objects.push(QrObj {
            base: w.clone(),
            rho: inner.d(w),
        });
    }
    MultLifting {
        src: QrDoctrine {
            base: qr.clone(),
            objects,
        },
        tgt: qr.clone(),
    }
}

impl<D: Doctrine> Lifting for MultLifting<D> {
    type Src = QrDoctrine<QrDoctrine<D>>;
    type Tgt = QrDoctrine<D>;

    fn src(&self) -> &QrDoctrine<QrDoctrine<D>> {
        &self.src
    }

    fn tgt(&self) -> &QrDoctrine<D> {
        &self.tgt
    }

    fn name(&self) -> String {
        "completion-mult".to_string()
    }

    fn strict(&self) -> bool {
        true
    }

    fn on_obj(&self, w: &QrObj<QrDoctrine<D>>) -> Result<QrObj<D>> {
        Ok(flatten_obj(w))
    }

    fn on_arr(&self, f: &QrArr<QrDoctrine<D>>) -> Result<QrArr<D>> {
        Ok(QrArr {
            dom: flatten_obj(&f.dom),
            cod: flatten_obj(&f.cod),
            map: f.map.map.clone(),
        })
    }

    fn on_rel(&self, a: &QrRel<QrDoctrine<D>>) -> Result<QrRel<D>> {
        Ok(QrRel {
            dom: flatten_obj(&a.dom),
            cod: flatten_obj(&a.cod),
            rel: a.rel.rel.clone(),
        })
    }
}

// ---------------------------------------------------------------------------
// Lax idempotency
// ---------------------------------------------------------------------------

/// The image of the unit under the completion functor: an object becomes
/// its discrete carrier nested under the original equivalence.
#[derive(Clone, Debug)]
pub struct CompletionOfUnit<D: Doctrine> {
    pub src: QrDoctrine<D>,
    pub tgt: QrDoctrine<QrDoctrine<D>>,
}

fn nest_discrete<D: Doctrine>(base: &D, w: &QrObj<D>) -> QrObj<QrDoctrine<D>> {
    let disc = discrete_obj(base, &w.base);
    QrObj {
        base: disc.clone(),
        rho: QrRel {
            dom: disc.clone(),
            cod: disc,
            rel: w.rho.clone(),
        },
    }
}

impl<D: Doctrine> Lifting for CompletionOfUnit<D> {
    type Src = QrDoctrine<D>;
    type Tgt = QrDoctrine<QrDoctrine<D>>;

    fn src(&self) -> &QrDoctrine<D> {
        &self.src
    }

    fn tgt(&self) -> &QrDoctrine<QrDoctrine<D>> {
        &self.tgt
    }

    fn name(&self) -> String {
        "completion-of-unit".to_string()
    }

    fn strict(&self) -> bool {
        true
    }

    fn on_obj(&self, w: &QrObj<D>) -> Result<QrObj<QrDoctrine<D>>> {
        Ok(nest_discrete(&self.src.base, w))
    }

    fn on_arr(&self, f: &QrArr<D>) -> Result<QrArr<QrDoctrine<D>>> {
        let base = &self.src.base;
        Ok(QrArr {
            dom: nest_discrete(base, &f.dom),
            cod: nest_discrete(base, &f.cod),
            map: QrArr {
                dom: discrete_obj(base, &f.dom.base),
                cod: discrete_obj(base, &f.cod.base),
                map: f.map.clone(),
            },
        })
    }

    fn on_rel(&self, a: &QrRel<D>) -> Result<QrRel<QrDoctrine<D>>> {
        let base = &self.src.base;
        Ok(QrRel {
            dom: nest_discrete(base, &a.dom),
            cod: nest_discrete(base, &a.cod),
            rel: QrRel {
                dom: discrete_obj(base, &a.dom.base),
                cod: discrete_obj(base, &a.cod.base),
                rel: a.rel.clone(),
            },
        })
    }
}

/// Check the lax-idempotency witnesses of the completion. The comparison
/// family at an object is carried by the identity, from the discrete
/// nesting to the unit nesting. Verified: it is a 2-arrow between the
/// two canonical liftings into the doubly completed doctrine, its
/// component at any discrete object is an identity, and flattening
/// collapses every component to an identity.
pub fn check_kzd<D: Doctrine>(qr: &QrDoctrine<D>, budget: &CheckBudget) -> Result<LawReport> {
    let mut rep = LawReport::new();
    let base = &qr.base;
    let mult = mult_lifting(qr);
    let f_lift = CompletionOfUnit {
        src: qr.clone(),
        tgt: mult.src.clone(),
    };
    let g_lift = UnitLifting {
        base: qr.clone(),
        qr: mult.src.clone(),
    };
    let qr2 = &mult.src;

    let mut components = Vec::new();
    for w in &qr.objects {
        let dom = f_lift.on_obj(w)?;
        let cod = g_lift.on_obj(w)?;
        // Carried by the identity, typed as the coarsening arrow from the
        // discrete carrier to the equivalence-carrying object.
        let coarsen = QrArr {
            dom: discrete_obj(base, &w.base),
            cod: w.clone(),
            map: base.id_arr(&w.base),
        };
        components.push((w.clone(), QrArr { dom, cod, map: coarsen }));
    }
    let lambda = TwoArrow {
        components: components.clone(),
    };
    rep.absorb(check_two_arrow(&f_lift, &g_lift, &lambda, budget)?);

    // At a discrete object the component is an identity on the nose.
    let mut disc_ok = true;
    let mut disc_witness = String::new();
    for (w, comp) in &components {
        if base.rel_eq(&w.rho, &base.d(&w.base))? {
            if !qr2.arr_eq(comp, &qr2.id_arr(&comp.dom)) {
                disc_ok = false;
                disc_witness = qr.obj_label(w);
            }
        }
    }
    rep.record(
        "kz-discrete-component-is-identity",
        "all discrete registered objects",
        disc_ok,
        || disc_witness.clone(),
    );

    // Flattening collapses every component to an identity.
    let mut mult_ok = true;
    let mut mult_witness = String::new();
    for (w, comp) in &components {
        let flattened = mult.on_arr(comp)?;
        if !qr.arr_eq(&flattened, &qr.id_arr(w)) {
            mult_ok = false;
            mult_witness = qr.obj_label(w);
        }
    }
    rep.record(
        "kz-mult-collapses-component",
        "all registered objects",
        mult_ok,
        || mult_witness.clone(),
    );
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doctrine::check_doctrine_laws;
    use crate::valuealg::{QuantaleSpec, Value, DEFAULT_EPS};

    fn abc() -> ObjRef {
        FinSetObj::new("X", vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    fn bool_pair_equiv(doc: &VRelDoctrine, x: &ObjRef) -> FinRel {
        // a ~ b, c alone.
        let mut rho = doc.d(x);
        rho.set(0, 1, Value::Idx(1));
        rho.set(1, 0, Value::Idx(1));
        rho
    }

    #[test]
    fn non_equivalences_are_rejected() {
        let x = abc();
        let doc = VRelDoctrine::boolean(vec![x.clone()]);
        let mut not_refl = doc.d(&x);
        not_refl.set(0, 0, Value::Idx(0));
        assert!(matches!(
            vmetric(&doc, &x, not_refl),
            Err(DocError::NotEquivalence(_))
        ));
        let mut not_sym = doc.d(&x);
        not_sym.set(0, 1, Value::Idx(1));
        assert!(matches!(
            vmetric(&doc, &x, not_sym),
            Err(DocError::NotEquivalence(_))
        ));
        let mut not_trans = doc.d(&x);
        for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            not_trans.set(i, j, Value::Idx(1));
        }
        assert!(matches!(
            vmetric(&doc, &x, not_trans),
            Err(DocError::NotEquivalence(_))
        ));
        assert!(vmetric(&doc, &x, bool_pair_equiv(&doc, &x)).is_ok());
    }

    #[test]
    fn boolean_partition_quotient_is_effective_descent() {
        let x = abc();
        let doc = VRelDoctrine::boolean(vec![x.clone()]);
        let space = vmetric(&doc, &x, bool_pair_equiv(&doc, &x)).unwrap();
        let built = build_quotient_vrel(&doc, &space).unwrap();
        assert_eq!(built.map.cod.elements, vec!["[a]", "[c]"]);
        assert_eq!(built.map.table, vec![0, 0, 1]);
        assert!(!built.closure_added);
        let probes = vec![
            x.clone(),
            built.map.cod.clone(),
            FinSetObj::new("P", vec!["0".into(), "1".into()]).unwrap(),
        ];
        let cert = quotient_cert(&doc, &built.map, &space.rho, &probes, &CheckBudget::default())
            .unwrap();
        assert!(cert.is_quotient, "{:?}", cert.failure);
        assert!(cert.effective);
        assert!(cert.descent, "{:?}", cert.failure);
    }

    #[test]
    fn finite_distance_equivalence_quotients_but_is_not_effective() {
        let x = FinSetObj::new("X", vec!["a".into(), "b".into()]).unwrap();
        let doc = VRelDoctrine::new(QuantaleSpec::lawvere(DEFAULT_EPS).unwrap(), vec![x.clone()]);
        let mut rho = doc.d(&x);
        rho.set(0, 1, Value::Num(2.0));
        rho.set(1, 0, Value::Num(2.0));
        let space = vmetric(&doc, &x, rho).unwrap();
        let built = build_quotient_vrel(&doc, &space).unwrap();
        // A finite distance forces identification: one class.
        assert_eq!(built.map.cod.len(), 1);
        let probes = vec![x.clone(), built.map.cod.clone()];
        let cert = quotient_cert(&doc, &built.map, &space.rho, &probes, &CheckBudget::default())
            .unwrap();
        assert!(cert.is_quotient, "{:?}", cert.failure);
        assert!(!cert.effective, "kernel is zero-or-infinity valued, the distance 2 is lost");
        assert!(cert.descent, "collapsing onto the class is surjective");
    }

    #[test]
    fn zero_divisor_quantale_can_force_extra_identifications() {
        let q = QuantaleSpec::powerset(&["u".to_string(), "v".to_string()]).unwrap();
        let x = abc();
        let doc = VRelDoctrine::new(q.clone(), vec![x.clone()]);
        // rho(a,b) = {u}, rho(b,c) = {v}, rho(a,c) = {u} & {v} = {} : still
        // transitive, but the forced identifications chain a ~ b ~ c.
        let full = q.unit();
        let e = q.bottom();
        let u = Value::Idx(0b01);
        let v = Value::Idx(0b10);
        let rho = FinRel::new(
            x.clone(),
            x.clone(),
            vec![full, u, e, u, full, v, e, v, full],
        )
        .unwrap();
        let space = vmetric(&doc, &x, rho).unwrap();
        let built = build_quotient_vrel(&doc, &space).unwrap();
        assert_eq!(built.map.cod.len(), 1);
        assert!(built.closure_added);
    }

    #[test]
    fn factorisation_splits_into_quotient_and_injection() {
        let x = abc();
        let y = FinSetObj::new("Y", vec!["u".into(), "v".into(), "w".into()]).unwrap();
        let doc = VRelDoctrine::boolean(vec![x.clone(), y.clone()]);
        let f = FinMap::new(x.clone(), y.clone(), vec![1, 1, 0]).unwrap();
        let (q, i) = factorize(&doc, &f).unwrap();
        assert_eq!(q.then(&i).unwrap(), f);
        assert!(is_surjective(&doc, &graph(&doc, &q).unwrap()).unwrap());
        assert!(crate::doctrine::is_injective(&doc, &graph(&doc, &i).unwrap()).unwrap());
        assert!(!crate::doctrine::is_surjective(&doc, &graph(&doc, &i).unwrap()).unwrap());
    }

    fn small_qr_boolean() -> QrDoctrine<VRelDoctrine> {
        let x = FinSetObj::new("X", vec!["a".into(), "b".into()]).unwrap();
        let doc = VRelDoctrine::boolean(vec![x.clone()]);
        let mut rho = doc.d(&x);
        rho.set(0, 1, Value::Idx(1));
        rho.set(1, 0, Value::Idx(1));
        qr_completion(
            doc.clone(),
            vec![
                discrete_obj(&doc, &x),
                QrObj { base: x, rho },
            ],
        )
        .unwrap()
    }

    #[test]
    fn completed_doctrine_satisfies_the_laws() {
        let qr = small_qr_boolean();
        let rep = check_doctrine_laws(&qr, &CheckBudget::default()).unwrap();
        assert!(rep.all_passed(), "{rep}");
        // Distance-valued base, sampled.
        let x = FinSetObj::new("X", vec!["p".into(), "q".into()]).unwrap();
        let doc = VRelDoctrine::new(QuantaleSpec::lawvere(DEFAULT_EPS).unwrap(), vec![x.clone()]);
        let mut rho = doc.d(&x);
        rho.set(0, 1, Value::Num(1.5));
        rho.set(1, 0, Value::Num(1.5));
        let qr = qr_completion(doc.clone(), vec![discrete_obj(&doc, &x), QrObj { base: x, rho }])
            .unwrap();
        let rep = check_doctrine_laws(&qr, &CheckBudget::default()).unwrap();
        assert!(rep.all_passed(), "{rep}");
    }

    #[test]
    fn descent_fibres_shrink_with_coarser_equivalences() {
        let qr = small_qr_boolean();
        let disc = &qr.objects[0];
        let quot = &qr.objects[1];
        let all = qr.base.fibre_enum(&disc.base, &disc.base, 1 << 10).unwrap().unwrap();
        let disc_fibre = qr.fibre_enum(disc, disc, 1 << 10).unwrap().unwrap();
        assert_eq!(disc_fibre.len(), all.len(), "discrete objects keep the whole fibre");
        let quot_fibre = qr.fibre_enum(quot, quot, 1 << 10).unwrap().unwrap();
        // Over the two-point total equivalence only bottom and top absorb it.
        assert_eq!(quot_fibre.len(), 2);
    }

    #[test]
    fn coarsening_arrow_is_an_effective_descent_quotient_in_the_completion() {
        let qr = small_qr_boolean();
        let disc = qr.objects[0].clone();
        let quot = qr.objects[1].clone();
        let q = qr_quotient_arrow(&qr, &disc, &quot).unwrap();
        let rho_as_rel = QrRel {
            dom: disc.clone(),
            cod: disc.clone(),
            rel: quot.rho.clone(),
        };
        let cert = quotient_cert(
            &qr,
            &q,
            &rho_as_rel,
            &qr.objects(),
            &CheckBudget::default(),
        )
        .unwrap();
        assert!(cert.is_quotient, "{:?}", cert.failure);
        assert!(cert.effective);
        assert!(cert.descent, "{:?}", cert.failure);
        // The other direction is not a coarsening.
        assert!(matches!(
            qr_quotient_arrow(&qr, &quot, &disc),
            Err(DocError::NotCoarser(_))
        ));
    }

    #[test]
    fn unit_and_mult_are_strict_liftings() {
        let qr = small_qr_boolean();
        let unit = unit_lifting(&qr.base);
        let rep = crate::lifting::check_lifting_laws(&unit, &CheckBudget::default()).unwrap();
        assert!(rep.all_passed(), "{rep}");
        let mult = mult_lifting(&qr);
        let rep = crate::lifting::check_lifting_laws(&mult, &CheckBudget::default()).unwrap();
        assert!(rep.all_passed(), "{rep}");
    }

    #[test]
    fn lax_idempotency_witnesses_hold() {
        let qr = small_qr_boolean();
        let rep = check_kzd(&qr, &CheckBudget::default()).unwrap();
        assert!(rep.all_passed(), "{rep}");
        assert!(rep.entry("kz-discrete-component-is-identity").is_some());
        assert!(rep.entry("kz-mult-collapses-component").is_some());
    }
}
