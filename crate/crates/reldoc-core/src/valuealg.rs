//! Value algebras that relations take values in.
//!
//! A quantale here is a complete lattice with a commutative monoidal tensor
//! that distributes over joins. Finite quantales are given by explicit
//! tables; the extended non-negative reals ordered by `>=` (tensor `+`,
//! unit `0`) are built in, as is the powerset of a finite base (tensor
//! intersection). Ordered semirings are the row-sum variant used by matrix
//! doctrines.

use crate::{DocError, LawReport, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Default tolerance for comparisons of real-valued distances.
pub const DEFAULT_EPS: f64 = 1e-9;

/// An element of a value algebra: an index into a finite carrier, or an
/// extended non-negative real (`f64::INFINITY` is the bottom of the
/// real-valued quantale).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Idx(usize),
    Num(f64),
}

impl Value {
    pub fn idx(self) -> usize {
        match self {
            Value::Idx(i) => i,
            Value::Num(x) => panic!("expected finite-carrier value, got numeric {x}"),
        }
    }

    pub fn num(self) -> f64 {
        match self {
            Value::Num(x) => x,
            Value::Idx(i) => panic!("expected numeric value, got carrier index {i}"),
        }
    }
}

/// Canonical label for a subset of a listed base, e.g. `{a,c}`.
pub fn subset_label<S: AsRef<str>>(items: &[S]) -> String {
    let mut s = String::from("{");
    for (k, it) in items.iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        s.push_str(it.as_ref());
    }
    s.push('}');
    s
}

/// A finite complete lattice with a tensor, fully tabulated.
/// `leq` and the tables are row-major over carrier indices.
#[derive(Clone, Debug)]
pub struct FiniteLattice {
    pub elems: Vec<String>,
    pub leq: Vec<bool>,
    pub tensor: Vec<usize>,
    pub unit: usize,
    pub join2: Vec<usize>,
    pub meet2: Vec<usize>,
    pub bottom: usize,
    pub top: usize,
}

#[derive(Clone, Debug)]
pub enum QuantaleKind {
    Finite(FiniteLattice),
    /// Extended non-negative reals, ordered by `>=`, tensor `+`, unit `0`.
    Lawvere { eps: f64 },
}

#[derive(Clone, Debug)]
pub struct QuantaleSpec {
    pub name: String,
    pub kind: QuantaleKind,
    /// Declared: tensor of two non-bottom values is never bottom.
    pub zero_divisor_free: bool,
    /// Declared: tensor coincides with binary meet.
    pub meet_is_tensor: bool,
}

fn scan_zero_divisor_free(lat: &FiniteLattice) -> bool {
    let n = lat.elems.len();
    for a in 0..n {
        for b in 0..n {
            if lat.tensor[a * n + b] == lat.bottom && a != lat.bottom && b != lat.bottom {
                return false;
            }
        }
    }
    true
}

fn scan_meet_is_tensor(lat: &FiniteLattice) -> bool {
    let n = lat.elems.len();
    (0..n * n).all(|k| lat.tensor[k] == lat.meet2[k])
}

impl QuantaleSpec {
    /// Build a finite quantale from explicit tables. The order and lattice
    /// structure are validated eagerly (they are needed by every later
    /// operation); the tensor laws are left to [`check_quantale_laws`] so
    /// that deliberately broken tensors can be loaded and reported.
    pub fn finite_from_tables(
        name: &str,
        elems: Vec<String>,
        leq: Vec<bool>,
        tensor: Vec<usize>,
        unit: usize,
    ) -> Result<QuantaleSpec> {
        let n = elems.len();
        if n == 0 {
            return Err(DocError::EmptyBase);
        }
        if leq.len() != n * n || tensor.len() != n * n {
            return Err(DocError::MalformedTable(format!(
                "quantale {name}: tables must be {n}x{n}"
            )));
        }
        if unit >= n || tensor.iter().any(|&t| t >= n) {
            return Err(DocError::MalformedTable(format!(
                "quantale {name}: table entry out of range"
            )));
        }
        let le = |i: usize, j: usize| leq[i * n + j];
        for i in 0..n {
            if !le(i, i) {
                return Err(DocError::MalformedTable(format!(
                    "quantale {name}: order not reflexive at {}",
                    elems[i]
                )));
            }
            for j in 0..n {
                if i != j && le(i, j) && le(j, i) {
                    return Err(DocError::MalformedTable(format!(
                        "quantale {name}: order not antisymmetric at {},{}",
                        elems[i], elems[j]
                    )));
                }
                for k in 0..n {
                    if le(i, j) && le(j, k) && !le(i, k) {
                        return Err(DocError::MalformedTable(format!(
                            "quantale {name}: order not transitive at {},{},{}",
                            elems[i], elems[j], elems[k]
                        )));
                    }
                }
            }
        }
        // Pairwise least upper/greatest lower bounds; a finite poset with
        // all of these plus extrema has all joins and meets.
        let mut join2 = vec![0usize; n * n];
        let mut meet2 = vec![0usize; n * n];
        for i in 0..n {
            for j in 0..n {
                let ubs: Vec<usize> = (0..n).filter(|&u| le(i, u) && le(j, u)).collect();
                let lub = ubs.iter().copied().find(|&u| ubs.iter().all(|&v| le(u, v)));
                let lbs: Vec<usize> = (0..n).filter(|&l| le(l, i) && le(l, j)).collect();
                let glb = lbs.iter().copied().find(|&l| lbs.iter().all(|&v| le(v, l)));
                match (lub, glb) {
                    (Some(u), Some(l)) => {
                        join2[i * n + j] = u;
                        meet2[i * n + j] = l;
                    }
                    _ => {
                        return Err(DocError::MalformedTable(format!(
                            "quantale {name}: no join or meet for {},{}",
                            elems[i], elems[j]
                        )))
                    }
                }
            }
        }
        let bottom = (0..n).find(|&b| (0..n).all(|x| le(b, x)));
        let top = (0..n).find(|&t| (0..n).all(|x| le(x, t)));
        let (bottom, top) = match (bottom, top) {
            (Some(b), Some(t)) => (b, t),
            _ => {
                return Err(DocError::MalformedTable(format!(
                    "quantale {name}: carrier has no bottom or no top"
                )))
            }
        };
        let lat = FiniteLattice {
            elems,
            leq,
            tensor,
            unit,
            join2,
            meet2,
            bottom,
            top,
        };
        let zdf = scan_zero_divisor_free(&lat);
        let mit = scan_meet_is_tensor(&lat);
        Ok(QuantaleSpec {
            name: name.to_string(),
            kind: QuantaleKind::Finite(lat),
            zero_divisor_free: zdf,
            meet_is_tensor: mit,
        })
    }

    /// Two truth values ordered `0 <= 1`, tensor = conjunction, unit = `1`.
    pub fn boolean() -> QuantaleSpec {
        let elems = vec!["0".to_string(), "1".to_string()];
        let leq = vec![true, true, false, true];
        let tensor = vec![0, 0, 0, 1];
        QuantaleSpec::finite_from_tables("boolean", elems, leq, tensor, 1)
            .expect("boolean tables are well formed")
    }

    /// Extended non-negative reals `[0, inf]` ordered by `>=`: join is
    /// numeric infimum, bottom is `inf`, tensor is truncated addition,
    /// unit is `0`. Comparisons use the supplied tolerance.
    pub fn lawvere(eps: f64) -> Result<QuantaleSpec> {
        if !(eps > 0.0) {
            return Err(DocError::MalformedTable(format!(
                "real-valued quantale needs a positive tolerance, got {eps}"
            )));
        }
        Ok(QuantaleSpec {
            name: "lawvere".to_string(),
            kind: QuantaleKind::Lawvere { eps },
            zero_divisor_free: true,
            meet_is_tensor: false,
        })
    }

    /// Powerset of a finite base, ordered by inclusion: join is union,
    /// tensor is intersection, unit is the full base. Carrier index `i`
    /// is the subset whose members are the bits of `i`.
    pub fn powerset(base: &[String]) -> Result<QuantaleSpec> {
        if base.is_empty() {
            return Err(DocError::EmptyBase);
        }
        if base.len() > 12 {
            return Err(DocError::SizeLimit(format!(
                "powerset quantale base of {} elements is too large",
                base.len()
            )));
        }
        let n = 1usize << base.len();
        let mut elems = Vec::with_capacity(n);
        for mask in 0..n {
            let items: Vec<&String> = base
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, e)| e)
                .collect();
            elems.push(subset_label(&items));
        }
        let mut leq = vec![false; n * n];
        let mut tensor = vec![0usize; n * n];
        for i in 0..n {
            for j in 0..n {
                leq[i * n + j] = i & j == i;
                tensor[i * n + j] = i & j;
            }
        }
        let name = format!("powerset({})", base.join(","));
        QuantaleSpec::finite_from_tables(&name, elems, leq, tensor, n - 1)
    }

    pub fn eps(&self) -> f64 {
        match &self.kind {
            QuantaleKind::Finite(_) => 0.0,
            QuantaleKind::Lawvere { eps } => *eps,
        }
    }

    /// Number of carrier elements, if finite.
    pub fn carrier_len(&self) -> Option<usize> {
        match &self.kind {
            QuantaleKind::Finite(lat) => Some(lat.elems.len()),
            QuantaleKind::Lawvere { .. } => None,
        }
    }

    pub fn elements(&self) -> Option<Vec<Value>> {
        self.carrier_len()
            .map(|n| (0..n).map(Value::Idx).collect())
    }

    pub fn leq(&self, a: Value, b: Value) -> bool {
        match &self.kind {
            QuantaleKind::Finite(lat) => {
                let n = lat.elems.len();
                lat.leq[a.idx() * n + b.idx()]
            }
            QuantaleKind::Lawvere { eps } => {
                let (x, y) = (a.num(), b.num());
                if y.is_infinite() {
                    x.is_infinite()
                } else {
                    x >= y - eps
                }
            }
        }
    }

    pub fn eq(&self, a: Value, b: Value) -> bool {
        match &self.kind {
            QuantaleKind::Finite(_) => a.idx() == b.idx(),
            QuantaleKind::Lawvere { eps } => {
                let (x, y) = (a.num(), b.num());
                (x.is_infinite() && y.is_infinite()) || (x - y).abs() <= *eps
            }
        }
    }

    pub fn tensor(&self, a: Value, b: Value) -> Value {
        match &self.kind {
            QuantaleKind::Finite(lat) => {
                let n = lat.elems.len();
                Value::Idx(lat.tensor[a.idx() * n + b.idx()])
            }
            QuantaleKind::Lawvere { .. } => Value::Num(a.num() + b.num()),
        }
    }

    pub fn join2(&self, a: Value, b: Value) -> Value {
        match &self.kind {
            QuantaleKind::Finite(lat) => {
                let n = lat.elems.len();
                Value::Idx(lat.join2[a.idx() * n + b.idx()])
            }
            QuantaleKind::Lawvere { .. } => Value::Num(a.num().min(b.num())),
        }
    }

    pub fn meet2(&self, a: Value, b: Value) -> Value {
        match &self.kind {
            QuantaleKind::Finite(lat) => {
                let n = lat.elems.len();
                Value::Idx(lat.meet2[a.idx() * n + b.idx()])
            }
            QuantaleKind::Lawvere { .. } => Value::Num(a.num().max(b.num())),
        }
    }

    /// Join of a finite family; the empty join is the bottom.
    pub fn join(&self, vs: impl IntoIterator<Item = Value>) -> Value {
        vs.into_iter().fold(self.bottom(), |a, b| self.join2(a, b))
    }

    /// Meet of a finite family; the empty meet is the top.
    pub fn meet(&self, vs: impl IntoIterator<Item = Value>) -> Value {
        vs.into_iter().fold(self.top(), |a, b| self.meet2(a, b))
    }

    pub fn bottom(&self) -> Value {
        match &self.kind {
            QuantaleKind::Finite(lat) => Value::Idx(lat.bottom),
            QuantaleKind::Lawvere { .. } => Value::Num(f64::INFINITY),
        }
    }

    pub fn top(&self) -> Value {
        match &self.kind {
            QuantaleKind::Finite(lat) => Value::Idx(lat.top),
            QuantaleKind::Lawvere { .. } => Value::Num(0.0),
        }
    }

    pub fn unit(&self) -> Value {
        match &self.kind {
            QuantaleKind::Finite(lat) => Value::Idx(lat.unit),
            QuantaleKind::Lawvere { .. } => Value::Num(0.0),
        }
    }

    pub fn is_bottom(&self, v: Value) -> bool {
        self.eq(v, self.bottom())
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Value {
        match &self.kind {
            QuantaleKind::Finite(lat) => Value::Idx(rng.gen_range(0..lat.elems.len())),
            QuantaleKind::Lawvere { .. } => {
                let roll: f64 = rng.gen();
                if roll < 0.15 {
                    Value::Num(f64::INFINITY)
                } else if roll < 0.3 {
                    Value::Num(0.0)
                } else {
                    Value::Num(rng.gen_range(0.0..8.0))
                }
            }
        }
    }

    pub fn fmt_value(&self, v: Value) -> String {
        match &self.kind {
            QuantaleKind::Finite(lat) => lat.elems[v.idx()].clone(),
            QuantaleKind::Lawvere { .. } => {
                let x = v.num();
                if x.is_infinite() {
                    "inf".to_string()
                } else {
                    format!("{x}")
                }
            }
        }
    }

    /// Look up a finite-carrier element by its label.
    pub fn value_from_name(&self, name: &str) -> Option<Value> {
        match &self.kind {
            QuantaleKind::Finite(lat) => lat
                .elems
                .iter()
                .position(|e| e == name)
                .map(Value::Idx),
            QuantaleKind::Lawvere { .. } => {
                if name == "inf" {
                    Some(Value::Num(f64::INFINITY))
                } else {
                    name.parse::<f64>().ok().filter(|x| *x >= 0.0).map(Value::Num)
                }
            }
        }
    }

    pub fn validate_value(&self, v: Value) -> Result<()> {
        match (&self.kind, v) {
            (QuantaleKind::Finite(lat), Value::Idx(i)) if i < lat.elems.len() => Ok(()),
            (QuantaleKind::Lawvere { .. }, Value::Num(x)) if x >= 0.0 => Ok(()),
            _ => Err(DocError::MalformedTable(format!(
                "value {v:?} does not belong to quantale {}",
                self.name
            ))),
        }
    }
}

/// Check the quantale laws. Finite carriers are swept exhaustively
/// (join-distributivity over every subset when the carrier is small,
/// over pairs and the empty family otherwise); the real-valued quantale
/// is checked on seeded samples since its laws are analytic.
pub fn check_quantale_laws(q: &QuantaleSpec) -> LawReport {
    let mut rep = LawReport::new();
    match &q.kind {
        QuantaleKind::Finite(lat) => check_finite_quantale(q, lat, &mut rep),
        QuantaleKind::Lawvere { .. } => check_lawvere_quantale(q, &mut rep),
    }
    rep
}

fn check_finite_quantale(q: &QuantaleSpec, lat: &FiniteLattice, rep: &mut LawReport) {
    let n = lat.elems.len();
    let name = |i: usize| lat.elems[i].as_str();
    let scope = format!("exhaustive, carrier {n}");

    // Lattice structure was validated at construction; re-affirm here so a
    // report is self-contained.
    rep.pass("order-is-partial-order", &scope);
    rep.pass("all-finite-joins-and-meets-exist", &scope);

    let mut assoc = None;
    let mut comm = None;
    let mut unit_law = None;
    let mut mono = None;
    'outer: for a in 0..n {
        for b in 0..n {
            let ab = lat.tensor[a * n + b];
            if comm.is_none() && ab != lat.tensor[b * n + a] {
                comm = Some((a, b));
            }
            for c in 0..n {
                let bc = lat.tensor[b * n + c];
                if lat.tensor[ab * n + c] != lat.tensor[a * n + bc] {
                    assoc = Some((a, b, c));
                    break 'outer;
                }
            }
        }
    }
    for a in 0..n {
        if lat.tensor[a * n + lat.unit] != a || lat.tensor[lat.unit * n + a] != a {
            unit_law = Some(a);
            break;
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !lat.leq[a * n + b] {
                continue;
            }
            for c in 0..n {
                if !lat.leq[lat.tensor[a * n + c] * n + lat.tensor[b * n + c]]
                    || !lat.leq[lat.tensor[c * n + a] * n + lat.tensor[c * n + b]]
                {
                    mono = Some((a, b, c));
                }
            }
        }
    }
    rep.record("tensor-associative", &scope, assoc.is_none(), || {
        let (a, b, c) = assoc.unwrap();
        format!(
            "({}.{}).{} = {} but {}.({}.{}) = {}",
            name(a),
            name(b),
            name(c),
            name(lat.tensor[lat.tensor[a * n + b] * n + c]),
            name(a),
            name(b),
            name(c),
            name(lat.tensor[a * n + lat.tensor[b * n + c]]),
        )
    });
    rep.record("tensor-commutative", &scope, comm.is_none(), || {
        let (a, b) = comm.unwrap();
        format!(
            "{}.{} = {} but {}.{} = {}",
            name(a),
            name(b),
            name(lat.tensor[a * n + b]),
            name(b),
            name(a),
            name(lat.tensor[b * n + a])
        )
    });
    rep.record("tensor-unit", &scope, unit_law.is_none(), || {
        let a = unit_law.unwrap();
        format!("{} tensored with the unit is not {}", name(a), name(a))
    });
    rep.record("tensor-monotone", &scope, mono.is_none(), || {
        let (a, b, c) = mono.unwrap();
        format!("{} <= {} not preserved by tensor with {}", name(a), name(b), name(c))
    });

    // Distributivity of tensor over joins of whole subsets (the empty
    // subset makes bottom absorbing).
    if n <= 12 {
        let mut witness = None;
        'dist: for a in 0..n {
            for mask in 0..(1usize << n) {
                let members = (0..n).filter(|k| mask >> k & 1 == 1);
                let joined = members
                    .clone()
                    .fold(lat.bottom, |x, y| lat.join2[x * n + y]);
                let left = lat.tensor[a * n + joined];
                let right = members
                    .map(|s| lat.tensor[a * n + s])
                    .fold(lat.bottom, |x, y| lat.join2[x * n + y]);
                if left != right {
                    witness = Some((a, mask, left, right));
                    break 'dist;
                }
            }
        }
        let sc = format!("exhaustive, all {} subsets", 1usize << n);
        rep.record("tensor-distributes-over-joins", &sc, witness.is_none(), || {
            let (a, mask, l, r) = witness.unwrap();
            let items: Vec<&str> = (0..n).filter(|k| mask >> k & 1 == 1).map(name).collect();
            format!(
                "{} . join{} = {} but joined tensors give {}",
                name(a),
                subset_label(&items),
                name(l),
                name(r)
            )
        });
    } else {
        let mut witness = None;
        'dist2: for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let left = lat.tensor[a * n + lat.join2[b * n + c]];
                    let right = lat.join2[lat.tensor[a * n + b] * n + lat.tensor[a * n + c]];
                    if left != right {
                        witness = Some((a, b, c));
                        break 'dist2;
                    }
                }
            }
            if lat.tensor[a * n + lat.bottom] != lat.bottom {
                witness = Some((a, lat.bottom, lat.bottom));
                break;
            }
        }
        rep.record(
            "tensor-distributes-over-joins",
            "exhaustive pairs and empty family",
            witness.is_none(),
            || {
                let (a, b, c) = witness.unwrap();
                format!("failed at {},{},{}", name(a), name(b), name(c))
            },
        );
    }

    let zdf = scan_zero_divisor_free(lat);
    rep.record(
        "zero-divisor-free-flag",
        &scope,
        zdf == q.zero_divisor_free,
        || format!("declared {} but carrier scan says {}", q.zero_divisor_free, zdf),
    );
    let mit = scan_meet_is_tensor(lat);
    rep.record(
        "meet-is-tensor-flag",
        &scope,
        mit == q.meet_is_tensor,
        || format!("declared {} but carrier scan says {}", q.meet_is_tensor, mit),
    );
}

fn check_lawvere_quantale(q: &QuantaleSpec, rep: &mut LawReport) {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let scope = "analytic laws, 200 numeric samples";
    let mut probes = Vec::new();
    for _ in 0..200 {
        probes.push((q.sample(&mut rng), q.sample(&mut rng), q.sample(&mut rng)));
    }
    let assoc = probes.iter().all(|&(a, b, c)| {
        q.eq(q.tensor(q.tensor(a, b), c), q.tensor(a, q.tensor(b, c)))
    });
    rep.record("tensor-associative", scope, assoc, || "numeric drift".into());
    let comm = probes.iter().all(|&(a, b, _)| q.eq(q.tensor(a, b), q.tensor(b, a)));
    rep.record("tensor-commutative", scope, comm, || "numeric drift".into());
    let unit = probes.iter().all(|&(a, _, _)| q.eq(q.tensor(a, q.unit()), a));
    rep.record("tensor-unit", scope, unit, || "numeric drift".into());
    let dist = probes.iter().all(|&(a, b, c)| {
        q.eq(
            q.tensor(a, q.join2(b, c)),
            q.join2(q.tensor(a, b), q.tensor(a, c)),
        )
    });
    rep.record("tensor-distributes-over-joins", scope, dist, || "numeric drift".into());
    rep.record(
        "empty-join-is-bottom",
        scope,
        q.eq(q.join(std::iter::empty()), q.bottom()),
        || "empty join differs from bottom".into(),
    );
    rep.record("zero-divisor-free-flag", scope, q.zero_divisor_free, || {
        "a sum of finite reals is finite; flag must be set".into()
    });
    rep.record("meet-is-tensor-flag", scope, !q.meet_is_tensor, || {
        "addition is not the numeric maximum; flag must be unset".into()
    });
}

// ---------------------------------------------------------------------------
// Ordered semirings
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum SemiringKind {
    Finite {
        elems: Vec<String>,
        leq: Vec<bool>,
        add: Vec<usize>,
        mul: Vec<usize>,
        zero: usize,
        one: usize,
    },
    /// View a quantale as a semiring: add = join, mul = tensor.
    Quantale(Box<QuantaleSpec>),
}

/// An ordered commutative semiring with finite sums, used for matrix
/// doctrines. Addition is the "row sum" of composition.
#[derive(Clone, Debug)]
pub struct SemiringSpec {
    pub name: String,
    pub kind: SemiringKind,
}

impl SemiringSpec {
    pub fn finite_from_tables(
        name: &str,
        elems: Vec<String>,
        leq: Vec<bool>,
        add: Vec<usize>,
        mul: Vec<usize>,
        zero: usize,
        one: usize,
    ) -> Result<SemiringSpec> {
        let n = elems.len();
        if n == 0 {
            return Err(DocError::EmptyBase);
        }
        if leq.len() != n * n || add.len() != n * n || mul.len() != n * n {
            return Err(DocError::MalformedTable(format!(
                "semiring {name}: tables must be {n}x{n}"
            )));
        }
        if zero >= n || one >= n || add.iter().chain(mul.iter()).any(|&t| t >= n) {
            return Err(DocError::MalformedTable(format!(
                "semiring {name}: table entry out of range"
            )));
        }
        for i in 0..n {
            if !leq[i * n + i] {
                return Err(DocError::MalformedTable(format!(
                    "semiring {name}: order not reflexive"
                )));
            }
            for j in 0..n {
                if i != j && leq[i * n + j] && leq[j * n + i] {
                    return Err(DocError::MalformedTable(format!(
                        "semiring {name}: order not antisymmetric"
                    )));
                }
                for k in 0..n {
                    if leq[i * n + j] && leq[j * n + k] && !leq[i * n + k] {
                        return Err(DocError::MalformedTable(format!(
                            "semiring {name}: order not transitive"
                        )));
                    }
                }
            }
        }
        Ok(SemiringSpec {
            name: name.to_string(),
            kind: SemiringKind::Finite {
                elems,
                leq,
                add,
                mul,
                zero,
                one,
            },
        })
    }

    pub fn from_quantale(q: &QuantaleSpec) -> SemiringSpec {
        SemiringSpec {
            name: format!("semiring({})", q.name),
            kind: SemiringKind::Quantale(Box::new(q.clone())),
        }
    }

    pub fn carrier_len(&self) -> Option<usize> {
        match &self.kind {
            SemiringKind::Finite { elems, .. } => Some(elems.len()),
            SemiringKind::Quantale(q) => q.carrier_len(),
        }
    }

    pub fn elements(&self) -> Option<Vec<Value>> {
        self.carrier_len().map(|n| (0..n).map(Value::Idx).collect())
    }

    pub fn leq(&self, a: Value, b: Value) -> bool {
        match &self.kind {
            SemiringKind::Finite { elems, leq, .. } => leq[a.idx() * elems.len() + b.idx()],
            SemiringKind::Quantale(q) => q.leq(a, b),
        }
    }

    pub fn eq(&self, a: Value, b: Value) -> bool {
        match &self.kind {
            SemiringKind::Finite { .. } => a.idx() == b.idx(),
            SemiringKind::Quantale(q) => q.eq(a, b),
        }
    }

    pub fn add(&self, a: Value, b: Value) -> Value {
        match &self.kind {
            SemiringKind::Finite { elems, add, .. } => {
                Value::Idx(add[a.idx() * elems.len() + b.idx()])
            }
            SemiringKind::Quantale(q) => q.join2(a, b),
        }
    }

    pub fn mul(&self, a: Value, b: Value) -> Value {
        match &self.kind {
            SemiringKind::Finite { elems, mul, .. } => {
                Value::Idx(mul[a.idx() * elems.len() + b.idx()])
            }
            SemiringKind::Quantale(q) => q.tensor(a, b),
        }
    }

    pub fn zero(&self) -> Value {
        match &self.kind {
            SemiringKind::Finite { zero, .. } => Value::Idx(*zero),
            SemiringKind::Quantale(q) => q.bottom(),
        }
    }

    pub fn one(&self) -> Value {
        match &self.kind {
            SemiringKind::Finite { one, .. } => Value::Idx(*one),
            SemiringKind::Quantale(q) => q.unit(),
        }
    }

    /// Finite sum; the empty sum is zero.
    pub fn sum(&self, vs: impl IntoIterator<Item = Value>) -> Value {
        vs.into_iter().fold(self.zero(), |a, b| self.add(a, b))
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Value {
        match &self.kind {
            SemiringKind::Finite { elems, .. } => Value::Idx(rng.gen_range(0..elems.len())),
            SemiringKind::Quantale(q) => q.sample(rng),
        }
    }

    pub fn fmt_value(&self, v: Value) -> String {
        match &self.kind {
            SemiringKind::Finite { elems, .. } => elems[v.idx()].clone(),
            SemiringKind::Quantale(q) => q.fmt_value(v),
        }
    }

    pub fn value_from_name(&self, name: &str) -> Option<Value> {
        match &self.kind {
            SemiringKind::Finite { elems, .. } => {
                elems.iter().position(|e| e == name).map(Value::Idx)
            }
            SemiringKind::Quantale(q) => q.value_from_name(name),
        }
    }
}

/// Check the ordered-semiring laws: addition is a commutative monoid with
/// identity zero, multiplication is associative with identity one and
/// annihilating zero, both are monotone, and multiplication commutes (the
/// converse of a matrix composition needs entrywise commutativity).
pub fn check_semiring_laws(s: &SemiringSpec) -> LawReport {
    use rand::SeedableRng;
    let mut rep = LawReport::new();
    let (probes, scope): (Vec<(Value, Value, Value)>, String) = match s.elements() {
        Some(es) => {
            let mut v = Vec::new();
            for &a in &es {
                for &b in &es {
                    for &c in &es {
                        v.push((a, b, c));
                    }
                }
            }
            (v, format!("exhaustive, carrier {}", es.len()))
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let v = (0..200)
                .map(|_| (s.sample(&mut rng), s.sample(&mut rng), s.sample(&mut rng)))
                .collect();
            (v, "200 numeric samples".to_string())
        }
    };
    let mut check = |law: &str, f: &dyn Fn(Value, Value, Value) -> bool| {
        let bad = probes.iter().copied().find(|&(a, b, c)| !f(a, b, c));
        rep.record(law, &scope, bad.is_none(), || {
            let (a, b, c) = bad.unwrap();
            format!(
                "witness ({},{},{})",
                s.fmt_value(a),
                s.fmt_value(b),
                s.fmt_value(c)
            )
        });
    };
    check("add-associative", &|a, b, c| {
        s.eq(s.add(s.add(a, b), c), s.add(a, s.add(b, c)))
    });
    check("add-commutative", &|a, b, _| s.eq(s.add(a, b), s.add(b, a)));
    check("add-zero", &|a, _, _| s.eq(s.add(a, s.zero()), a));
    check("mul-associative", &|a, b, c| {
        s.eq(s.mul(s.mul(a, b), c), s.mul(a, s.mul(b, c)))
    });
    check("mul-commutative", &|a, b, _| s.eq(s.mul(a, b), s.mul(b, a)));
    check("mul-one", &|a, _, _| {
        s.eq(s.mul(a, s.one()), a) && s.eq(s.mul(s.one(), a), a)
    });
    check("mul-zero-absorbing", &|a, _, _| {
        s.eq(s.mul(a, s.zero()), s.zero()) && s.eq(s.mul(s.zero(), a), s.zero())
    });
    check("add-monotone", &|a, b, c| {
        !s.leq(a, b) || s.leq(s.add(a, c), s.add(b, c))
    });
    check("mul-monotone", &|a, b, c| {
        !s.leq(a, b) || s.leq(s.mul(a, c), s.mul(b, c))
    });
    check("mul-distributes-over-add", &|a, b, c| {
        s.eq(s.mul(a, s.add(b, c)), s.add(s.mul(a, b), s.mul(a, c)))
    });
    rep
}
