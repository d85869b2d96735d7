//! Extensionality: when do parallel arrows carry the same relational
//! content, and the collapse that forces them to coincide.
//!
//! Two parallel arrows coincide extensionally when the identity relation
//! of the domain is below the codomain identity reindexed along the
//! pair; equivalently their graphs are equal. The collapse keeps one
//! canonical representative per coincidence class; applied after the
//! quotient completion of plain relations it yields the doctrine of
//! setoids. Separation quotients a carrier by the unit-distance pairs
//! of its equivalence.

use crate::doctrine::{Doctrine, FinMap, FinRel, FinSetObj, VRelDoctrine};
use crate::quotient::{check_equivalence, qr_completion, QrDoctrine, VMetricSpace};
use crate::{DocError, Result};
use rand_chacha::ChaCha8Rng;

/// Extensional coincidence of two parallel arrows.
pub fn ext_equal<D: Doctrine>(doc: &D, f: &D::A, g: &D::A) -> Result<bool> {
    let x = doc.arr_dom(f);
    let y = doc.arr_cod(f);
    if !doc.obj_eq(&x, &doc.arr_dom(g)) || !doc.obj_eq(&y, &doc.arr_cod(g)) {
        return Err(DocError::NotParallel(format!(
            "{} and {} do not share endpoints",
            doc.arr_label(f),
            doc.arr_label(g)
        )));
    }
    doc.rel_leq(&doc.d(&x), &doc.reindex(f, g, &doc.d(&y))?)
}

/// A doctrine is extensional when coincidence implies equality on every
/// registered hom-set. Returns a witness pair otherwise.
pub fn is_extensional<D: Doctrine>(
    doc: &D,
    objects: &[D::O],
    hom_cap: usize,
) -> Result<(bool, Option<String>)> {
    for x in objects {
        for y in objects {
            let arrows = doc.arrows(x, y, hom_cap)?;
            for (i, f) in arrows.iter().enumerate() {
                for g in &arrows[i + 1..] {
                    if ext_equal(doc, f, g)? && !doc.arr_eq(f, g) {
                        return Ok((
                            false,
                            Some(format!(
                                "{} and {} coincide but differ",
                                doc.arr_label(f),
                                doc.arr_label(g)
                            )),
                        ));
                    }
                }
            }
        }
    }
    Ok((true, None))
}

/// One coincidence class of parallel arrows. The representative is the
/// first member in the hom enumeration order.
#[derive(Clone, Debug)]
pub struct ArrowClass<A> {
    pub representative: A,
    pub members: Vec<A>,
}

/// Partition a hom-set into coincidence classes.
pub fn ec_collapse<D: Doctrine>(
    doc: &D,
    x: &D::O,
    y: &D::O,
    hom_cap: usize,
) -> Result<Vec<ArrowClass<D::A>>> {
    let mut classes: Vec<ArrowClass<D::A>> = Vec::new();
    for f in doc.arrows(x, y, hom_cap)? {
        let mut placed = false;
        for c in &mut classes {
            if ext_equal(doc, &c.representative, &f)? {
                c.members.push(f.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(ArrowClass {
                representative: f.clone(),
                members: vec![f],
            });
        }
    }
    Ok(classes)
}

/// The extensional collapse of a doctrine: same objects and fibres,
/// arrows taken up to coincidence with canonical representatives.
#[derive(Clone, Debug)]
pub struct EcDoctrine<D: Doctrine> {
    pub base: D,
    pub hom_cap: usize,
}

pub fn ec_doctrine<D: Doctrine>(base: D, hom_cap: usize) -> EcDoctrine<D> {
    EcDoctrine { base, hom_cap }
}

impl<D: Doctrine> EcDoctrine<D> {
    /// Canonical representative of an arrow's coincidence class.
    pub fn normalize(&self, f: &D::A) -> Result<D::A> {
        let x = self.base.arr_dom(f);
        let y = self.base.arr_cod(f);
        for g in self.base.arrows(&x, &y, self.hom_cap)? {
            if ext_equal(&self.base, &g, f)? {
                return Ok(g);
            }
        }
        Ok(f.clone())
    }
}

impl<D: Doctrine> Doctrine for EcDoctrine<D> {
    type O = D::O;
    type A = D::A;
    type R = D::R;

    fn tag(&self) -> &'static str {
        "extensional-collapse"
    }

    fn objects(&self) -> Vec<D::O> {
        self.base.objects()
    }

    fn obj_eq(&self, x: &D::O, y: &D::O) -> bool {
        self.base.obj_eq(x, y)
    }

    fn obj_label(&self, x: &D::O) -> String {
        self.base.obj_label(x)
    }

    fn check_obj(&self, x: &D::O) -> Result<()> {
        self.base.check_obj(x)
    }

    fn arrows(&self, x: &D::O, y: &D::O, cap: usize) -> Result<Vec<D::A>> {
        Ok(ec_collapse(&self.base, x, y, cap)?
            .into_iter()
            .map(|c| c.representative)
            .collect())
    }

    fn arr_dom(&self, f: &D::A) -> D::O {
        self.base.arr_dom(f)
    }

    fn arr_cod(&self, f: &D::A) -> D::O {
        self.base.arr_cod(f)
    }

    fn arr_eq(&self, f: &D::A, g: &D::A) -> bool {
        ext_equal(&self.base, f, g).unwrap_or(false)
    }

    fn id_arr(&self, x: &D::O) -> D::A {
        let id = self.base.id_arr(x);
        self.normalize(&id).unwrap_or(id)
    }

    fn then_arr(&self, f: &D::A, g: &D::A) -> Result<D::A> {
        self.normalize(&self.base.then_arr(f, g)?)
    }

    fn arr_label(&self, f: &D::A) -> String {
        format!("[{}]", self.base.arr_label(f))
    }

    fn rel_dom(&self, a: &D::R) -> D::O {
        self.base.rel_dom(a)
    }

    fn rel_cod(&self, a: &D::R) -> D::O {
        self.base.rel_cod(a)
    }

    fn rel_leq(&self, a: &D::R, b: &D::R) -> Result<bool> {
        self.base.rel_leq(a, b)
    }

    fn d(&self, x: &D::O) -> D::R {
        self.base.d(x)
    }

    fn comp(&self, a: &D::R, b: &D::R) -> Result<D::R> {
        self.base.comp(a, b)
    }

    fn conv(&self, a: &D::R) -> D::R {
        self.base.conv(a)
    }

    fn reindex(&self, f: &D::A, g: &D::A, a: &D::R) -> Result<D::R> {
        self.base.reindex(f, g, a)
    }

    fn rel_label(&self, a: &D::R) -> String {
        self.base.rel_label(a)
    }

    fn fibre_enum(&self, x: &D::O, y: &D::O, cap: usize) -> Result<Option<Vec<D::R>>> {
        self.base.fibre_enum(x, y, cap)
    }

    fn fibre_sample(&self, x: &D::O, y: &D::O, rng: &mut ChaCha8Rng) -> D::R {
        self.base.fibre_sample(x, y, rng)
    }

    fn rel_meet(&self, a: &D::R, b: &D::R) -> Option<D::R> {
        self.base.rel_meet(a, b)
    }

    fn rel_join(&self, a: &D::R, b: &D::R) -> Option<D::R> {
        self.base.rel_join(a, b)
    }

    fn rel_top(&self, x: &D::O, y: &D::O) -> Option<D::R> {
        self.base.rel_top(x, y)
    }

    fn rel_bot(&self, x: &D::O, y: &D::O) -> Option<D::R> {
        self.base.rel_bot(x, y)
    }
}

/// Setoid doctrine: the extensional collapse of the quotient completion.
pub fn eq_completion(
    base: VRelDoctrine,
    spaces: Vec<VMetricSpace>,
    hom_cap: usize,
) -> Result<EcDoctrine<QrDoctrine<VRelDoctrine>>> {
    Ok(ec_doctrine(qr_completion(base, spaces)?, hom_cap))
}

// ---------------------------------------------------------------------------
// Separation
// ---------------------------------------------------------------------------

/// No two distinct points sit at the unit value of the equivalence.
pub fn is_separated(doc: &VRelDoctrine, m: &VMetricSpace) -> Result<bool> {
    let n = m.base.len();
    for i in 0..n {
        for j in 0..n {
            if i != j && doc.q.leq(doc.q.unit(), m.rho.get(i, j)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Quotient a carrier by the unit-value pairs of its equivalence. The
/// induced equivalence on classes is measured between least-index
/// representatives and checked for well-definedness across members.
pub fn separation_quotient(
    doc: &VRelDoctrine,
    m: &VMetricSpace,
) -> Result<(FinMap, VMetricSpace)> {
    check_equivalence(doc, &m.rho)?;
    let x = &m.base;
    let n = x.len();
    let unit = doc.q.unit();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in 0..n {
            if doc.q.leq(unit, m.rho.get(i, j)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
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
    let sep_carrier = FinSetObj::new(&format!("sep({})", x.name), labels)?;
    let q = FinMap::new(x.clone(), sep_carrier.clone(), class_of)?;
    let sep_rho = FinRel::from_fn(&sep_carrier, &sep_carrier, |c1, c2| {
        m.rho.get(reps[c1], reps[c2])
    });
    // The value between classes must not depend on the member chosen.
    for i in 0..n {
        for j in 0..n {
            let v = sep_rho.get(q.apply(i), q.apply(j));
            if !doc.q.eq(v, m.rho.get(i, j)) {
                return Err(DocError::IllDefined(format!(
                    "separated value between {} and {} drifts across class members",
                    x.elements[i], x.elements[j]
                )));
            }
        }
    }
    let space = crate::quotient::vmetric(doc, &sep_carrier, sep_rho)?;
    Ok((q, space))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doctrine::{graph, is_bijective_arrow, is_balanced, FinSetObj, ObjRef};
    use crate::quotient::{discrete_obj, QrObj};
    use crate::valuealg::{QuantaleSpec, Value, DEFAULT_EPS};

    fn two(name: &str, a: &str, b: &str) -> ObjRef {
        FinSetObj::new(name, vec![a.into(), b.into()]).unwrap()
    }

    #[test]
    fn coincidence_in_plain_relations_is_equality_of_graphs() {
        let x = two("X", "a", "b");
        let y = two("Y", "u", "v");
        let doc = VRelDoctrine::boolean(vec![x.clone(), y.clone()]);
        for f in FinMap::all_maps(&x, &y, 100).unwrap() {
            for g in FinMap::all_maps(&x, &y, 100).unwrap() {
                let coincide = ext_equal(&doc, &f, &g).unwrap();
                let graphs = doc
                    .rel_eq(&graph(&doc, &f).unwrap(), &graph(&doc, &g).unwrap())
                    .unwrap();
                assert_eq!(coincide, graphs);
                assert_eq!(coincide, f == g);
            }
        }
        let h = FinMap::identity(&x);
        let k = FinMap::identity(&y);
        assert!(matches!(
            ext_equal(&doc, &h, &k),
            Err(DocError::NotParallel(_))
        ));
        let (ext, _) = is_extensional(&doc, &doc.objects, 1000).unwrap();
        assert!(ext);
    }

    fn total_equiv(doc: &VRelDoctrine, x: &ObjRef) -> QrObj<VRelDoctrine> {
        QrObj {
            base: x.clone(),
            rho: doc.rel_top(x, x).unwrap(),
        }
    }

    #[test]
    fn quotient_completion_is_not_extensional_and_the_collapse_fixes_it() {
        let x = two("X", "a", "b");
        let y = two("Y", "u", "v");
        let doc = VRelDoctrine::boolean(vec![x.clone(), y.clone()]);
        let qr = qr_completion(
            doc.clone(),
            vec![
                total_equiv(&doc, &x),
                discrete_obj(&doc, &y),
            ],
        )
        .unwrap();
        let (ext, witness) = is_extensional(&qr, &qr.objects(), 1000).unwrap();
        assert!(!ext, "a total equivalence identifies the two constant maps");
        assert!(witness.is_some());
        let ec = ec_doctrine(qr, 1000);
        let (ext, witness) = is_extensional(&ec, &ec.objects(), 1000).unwrap();
        assert!(ext, "witness: {witness:?}");
    }

    #[test]
    fn setoid_hom_counts_match_functions_up_to_equivalence() {
        let x = two("X", "a", "b");
        let y = two("Y", "u", "v");
        let doc = VRelDoctrine::boolean(vec![x.clone(), y.clone()]);
        let xs = total_equiv(&doc, &x);
        let ys = discrete_obj(&doc, &y);
        let ec = eq_completion(doc, vec![xs.clone(), ys.clone()], 1000).unwrap();
        // Maps out of the glued pair must be constant: two distinct classes.
        assert_eq!(ec.arrows(&xs, &ys, 1000).unwrap().len(), 2);
        // Into the glued pair every map works and all coincide.
        assert_eq!(ec.arrows(&ys, &xs, 1000).unwrap().len(), 1);
        assert_eq!(ec.arrows(&xs, &xs, 1000).unwrap().len(), 1);
        // Between discrete objects nothing is identified.
        assert_eq!(ec.arrows(&ys, &ys, 1000).unwrap().len(), 4);
    }

    #[test]
    fn bijective_but_non_invertible_arrow_becomes_invertible_after_collapse() {
        let x = two("X", "a", "b");
        let one = FinSetObj::new("1", vec!["*".into()]).unwrap();
        let doc = VRelDoctrine::boolean(vec![x.clone(), one.clone()]);
        let glued = total_equiv(&doc, &x);
        let point = discrete_obj(&doc, &one);
        let qr = qr_completion(doc, vec![glued.clone(), point.clone()]).unwrap();
        let collapse = crate::quotient::QrArr {
            dom: glued.clone(),
            cod: point.clone(),
            map: FinMap::new(x.clone(), one.clone(), vec![0, 0]).unwrap(),
        };
        assert!(is_bijective_arrow(&qr, &collapse).unwrap());
        let (balanced, witness) = is_balanced(&qr, &qr.objects(), 1000).unwrap();
        assert!(!balanced, "bijective collapse map has no two-sided inverse");
        assert!(witness.is_some());
        // After the extensional collapse the section inverts it on the nose.
        let ec = ec_doctrine(qr.clone(), 1000);
        let sections = ec.arrows(&point, &glued, 1000).unwrap();
        assert_eq!(sections.len(), 1);
        let s = &sections[0];
        let fwd = ec.then_arr(&collapse, s).unwrap();
        assert!(ec.arr_eq(&fwd, &ec.id_arr(&glued)));
        let back = ec.then_arr(s, &collapse).unwrap();
        assert!(ec.arr_eq(&back, &ec.id_arr(&point)));
        let (balanced, _) = is_balanced(&ec, &ec.objects(), 1000).unwrap();
        assert!(balanced);
    }

    #[test]
    fn separation_merges_unit_pairs_and_keeps_distances() {
        let x = FinSetObj::new("X", vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let doc = VRelDoctrine::new(QuantaleSpec::lawvere(DEFAULT_EPS).unwrap(), vec![x.clone()]);
        let rho = FinRel::new(
            x.clone(),
            x.clone(),
            vec![
                Value::Num(0.0),
                Value::Num(0.0),
                Value::Num(5.0),
                Value::Num(0.0),
                Value::Num(0.0),
                Value::Num(5.0),
                Value::Num(5.0),
                Value::Num(5.0),
                Value::Num(0.0),
            ],
        )
        .unwrap();
        let space = crate::quotient::vmetric(&doc, &x, rho).unwrap();
        assert!(!is_separated(&doc, &space).unwrap());
        let (q, sep) = separation_quotient(&doc, &space).unwrap();
        assert_eq!(q.table, vec![0, 0, 1]);
        assert_eq!(sep.base.elements, vec!["[a]", "[c]"]);
        assert_eq!(sep.rho.get(0, 1).num(), 5.0);
        assert_eq!(sep.rho.get(0, 0).num(), 0.0);
        assert!(is_separated(&doc, &sep).unwrap());
        // Separating twice merges nothing further.
        let (q2, sep2) = separation_quotient(&doc, &sep).unwrap();
        assert_eq!(q2.table, vec![0, 1]);
        assert_eq!(sep2.base.len(), 2);
        assert_eq!(sep2.rho.get(0, 1).num(), 5.0);
    }

    #[test]
    fn boolean_separation_is_the_partition_quotient() {
        let x = FinSetObj::new("X", vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let doc = VRelDoctrine::boolean(vec![x.clone()]);
        let mut rho = doc.d(&x);
        rho.set(0, 1, Value::Idx(1));
        rho.set(1, 0, Value::Idx(1));
        let space = crate::quotient::vmetric(&doc, &x, rho).unwrap();
        let (q, sep) = separation_quotient(&doc, &space).unwrap();
        assert_eq!(q.table, vec![0, 0, 1]);
        assert!(is_separated(&doc, &sep).unwrap());
        let built = crate::quotient::build_quotient_vrel(&doc, &space).unwrap();
        assert_eq!(built.map.table, q.table, "over the Boolean algebra the two quotients agree");
    }
}
