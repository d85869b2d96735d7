//! Instance files: one JSON document declaring named quantales, sets,
//! maps, relations, spaces, systems, algebras and doctrines. Everything
//! is resolved and certified up front, so commands never see unchecked
//! structures.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use reldoc_core::doctrine::{
    FinMap, FinRel, FinSetObj, MatDoctrine, ObjRef, PresentedDoctrine, VRelDoctrine,
};
use reldoc_core::lifting::Coalgebra;
use reldoc_core::projalg::{em_doctrine, Algebra, MonadSpec};
use reldoc_core::quotient::{vmetric, VMetricSpace};
use reldoc_core::structure::{build_h_counterexample, rmap_doctrine, RMapDoctrine};
use reldoc_core::valuealg::{QuantaleSpec, SemiringKind, SemiringSpec, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: Option<u32>,
    #[serde(default)]
    pub options: FileOptions,
    #[serde(default)]
    pub quantales: BTreeMap<String, QuantaleDecl>,
    #[serde(default)]
    pub semirings: BTreeMap<String, SemiringDecl>,
    #[serde(default)]
    pub sets: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub maps: BTreeMap<String, MapDecl>,
    #[serde(default)]
    pub relations: BTreeMap<String, RelDecl>,
    #[serde(default)]
    pub metric_spaces: BTreeMap<String, SpaceDecl>,
    #[serde(default)]
    pub transition_systems: BTreeMap<String, TsDecl>,
    #[serde(default)]
    pub algebras: BTreeMap<String, AlgDecl>,
    #[serde(default)]
    pub doctrines: BTreeMap<String, DoctrineDecl>,
}

#[derive(Deserialize, Default, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct FileOptions {
    pub eps: Option<f64>,
    pub hom_cap: Option<usize>,
    pub max_iter: Option<usize>,
    pub sample_count: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuantaleDecl {
    Boolean,
    Lawvere,
    Powerset { base: Vec<String> },
}

#[derive(Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SemiringDecl {
    Finite {
        elems: Vec<String>,
        leq: Vec<Vec<bool>>,
        add: Vec<Vec<String>>,
        mul: Vec<Vec<String>>,
        zero: String,
        one: String,
    },
    Quantale {
        quantale: String,
    },
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct MapDecl {
    pub dom: String,
    pub cod: String,
    /// Image element names, one per domain element in order.
    pub table: Vec<String>,
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct RelDecl {
    pub dom: String,
    pub cod: String,
    pub quantale: String,
    /// Row-major, one row per domain element.
    pub matrix: Vec<Vec<serde_json::Value>>,
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct SpaceDecl {
    pub carrier: String,
    pub quantale: String,
    pub matrix: Vec<Vec<serde_json::Value>>,
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct TsDecl {
    pub states: String,
    /// Successor state names, one list per state in carrier order.
    pub succ: Vec<Vec<String>>,
    /// Value quantale for behavioural comparison; boolean when absent.
    pub quantale: Option<String>,
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct AlgDecl {
    pub carrier: String,
    /// Result element per subset of the carrier, indexed by bitmask
    /// (bit i = carrier element i).
    pub structure: Vec<String>,
}

#[derive(Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DoctrineDecl {
    Vrel { quantale: String, objects: Vec<String> },
    Mat { semiring: String, objects: Vec<String> },
    RmapOrd { quantale: String, objects: Vec<String> },
    Builtin { name: String },
}

/// Effective run options after merging file, flags, and environment.
#[derive(Clone, Copy)]
pub struct RunOptions {
    pub eps: f64,
    pub hom_cap: usize,
    pub max_iter: usize,
    pub sample_count: usize,
    pub seed: u64,
}

pub struct CliOverrides {
    pub eps: Option<f64>,
    pub hom_cap: Option<usize>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub env_seed: Option<u64>,
}

impl RunOptions {
    pub fn merge(file: FileOptions, cli: &CliOverrides) -> RunOptions {
        RunOptions {
            eps: cli.eps.or(file.eps).unwrap_or(1e-9),
            hom_cap: cli.hom_cap.or(file.hom_cap).unwrap_or(100_000),
            max_iter: cli.max_iter.or(file.max_iter).unwrap_or(1000),
            sample_count: file.sample_count.unwrap_or(80),
            seed: cli.env_seed.or(cli.seed).or(file.seed).unwrap_or(17),
        }
    }

    pub fn budget(&self) -> reldoc_core::doctrine::CheckBudget {
        reldoc_core::doctrine::CheckBudget {
            samples: self.sample_count,
            hom_cap: self.hom_cap,
            seed: self.seed,
            ..Default::default()
        }
    }
}

pub enum AnyDoctrine {
    VRel(VRelDoctrine),
    Mat(MatDoctrine),
    Presented(PresentedDoctrine),
    RMap(RMapDoctrine<VRelDoctrine>),
}

/// Declared structures after validation. Sets, semirings and relations
/// are checked during resolution and only kept where a command needs
/// them back.
pub struct Resolved {
    pub options: RunOptions,
    pub quantale_decls: BTreeMap<String, QuantaleDecl>,
    pub quantales: BTreeMap<String, QuantaleSpec>,
    pub maps: BTreeMap<String, FinMap>,
    pub spaces: BTreeMap<String, (String, VMetricSpace)>,
    pub systems: BTreeMap<String, (Option<String>, Coalgebra)>,
    pub algebras: BTreeMap<String, Algebra>,
    pub doctrines: BTreeMap<String, AnyDoctrine>,
}

/// One matrix cell for the named quantale kind. Booleans are 0/1 or
/// true/false, distances are numbers with "inf" for infinity, subset
/// values are arrays of base element names.
pub fn parse_value(decl: &QuantaleDecl, v: &serde_json::Value) -> Result<Value> {
    match decl {
        QuantaleDecl::Boolean => match v {
            serde_json::Value::Bool(b) => Ok(Value::Idx(*b as usize)),
            serde_json::Value::Number(n) => match n.as_u64() {
                Some(0) => Ok(Value::Idx(0)),
                Some(1) => Ok(Value::Idx(1)),
                _ => bail!("boolean entries must be 0 or 1, got {n}"),
            },
            other => bail!("boolean entries must be 0 or 1, got {other}"),
        },
        QuantaleDecl::Lawvere => match v {
            serde_json::Value::Number(n) => {
                let x = n
                    .as_f64()
                    .ok_or_else(|| anyhow!("distance {n} is not representable"))?;
                if x < 0.0 {
                    bail!("distances must be at least zero, got {x}");
                }
                Ok(Value::Num(x))
            }
            serde_json::Value::String(s) if s == "inf" => Ok(Value::Num(f64::INFINITY)),
            other => bail!("distance entries must be numbers or \"inf\", got {other}"),
        },
        QuantaleDecl::Powerset { base } => match v {
            serde_json::Value::Array(items) => {
                let mut mask = 0usize;
                for item in items {
                    let name = item
                        .as_str()
                        .ok_or_else(|| anyhow!("subset entries must list element names"))?;
                    let bit = base
                        .iter()
                        .position(|b| b == name)
                        .ok_or_else(|| anyhow!("{name} is not in the subset base"))?;
                    mask |= 1 << bit;
                }
                Ok(Value::Idx(mask))
            }
            other => bail!("subset entries must be arrays of names, got {other}"),
        },
    }
}

/// Inverse of `parse_value`, used when matrices are reported back.
pub fn value_json(decl: &QuantaleDecl, v: &Value) -> serde_json::Value {
    match decl {
        QuantaleDecl::Boolean => {
            let k = match v {
                Value::Idx(k) => *k,
                Value::Num(_) => 0,
            };
            serde_json::json!(k)
        }
        QuantaleDecl::Lawvere => match v {
            Value::Num(x) if x.is_finite() => serde_json::json!(x),
            _ => serde_json::json!("inf"),
        },
        QuantaleDecl::Powerset { base } => {
            let mask = match v {
                Value::Idx(k) => *k,
                Value::Num(_) => 0,
            };
            let names: Vec<&String> = base
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, b)| b)
                .collect();
            serde_json::json!(names)
        }
    }
}

fn parse_matrix(
    decl: &QuantaleDecl,
    dom: &ObjRef,
    cod: &ObjRef,
    matrix: &[Vec<serde_json::Value>],
) -> Result<FinRel> {
    if matrix.len() != dom.len() || matrix.iter().any(|row| row.len() != cod.len()) {
        bail!(
            "matrix must be {}x{} row-major over {} and {}",
            dom.len(),
            cod.len(),
            dom.name,
            cod.name
        );
    }
    let mut entries = Vec::with_capacity(dom.len() * cod.len());
    for row in matrix {
        for cell in row {
            entries.push(parse_value(decl, cell)?);
        }
    }
    Ok(FinRel::new(dom.clone(), cod.clone(), entries)?)
}

fn element_index(set: &ObjRef, name: &str) -> Result<usize> {
    set.index_of(name)
        .ok_or_else(|| anyhow!("{name} is not an element of {}", set.name))
}

pub fn resolve(file: &InstanceFile, options: RunOptions) -> Result<Resolved> {
    if let Some(v) = file.schema_version {
        if v != SCHEMA_VERSION {
            bail!("unsupported schema_version {v}, expected {SCHEMA_VERSION}");
        }
    }

    let mut quantales = BTreeMap::new();
    for (name, decl) in &file.quantales {
        let q = match decl {
            QuantaleDecl::Boolean => QuantaleSpec::boolean(),
            QuantaleDecl::Lawvere => QuantaleSpec::lawvere(options.eps)
                .with_context(|| format!("quantale {name}"))?,
            QuantaleDecl::Powerset { base } => {
                QuantaleSpec::powerset(base).with_context(|| format!("quantale {name}"))?
            }
        };
        quantales.insert(name.clone(), q);
    }

    let mut semirings = BTreeMap::new();
    for (name, decl) in &file.semirings {
        let s = match decl {
            SemiringDecl::Finite {
                elems,
                leq,
                add,
                mul,
                zero,
                one,
            } => {
                let n = elems.len();
                let idx = |e: &str| -> Result<usize> {
                    elems
                        .iter()
                        .position(|x| x == e)
                        .ok_or_else(|| anyhow!("semiring {name}: unknown element {e}"))
                };
                let flat_names = |rows: &[Vec<String>]| -> Result<Vec<usize>> {
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        bail!("semiring {name}: tables must be {n}x{n}");
                    }
                    rows.iter().flatten().map(|e| idx(e)).collect()
                };
                if leq.len() != n || leq.iter().any(|r| r.len() != n) {
                    bail!("semiring {name}: leq must be {n}x{n}");
                }
                SemiringSpec::finite_from_tables(
                    name,
                    elems.clone(),
                    leq.iter().flatten().copied().collect(),
                    flat_names(add)?,
                    flat_names(mul)?,
                    idx(zero)?,
                    idx(one)?,
                )
                .with_context(|| format!("semiring {name}"))?
            }
            SemiringDecl::Quantale { quantale } => {
                let q = quantales
                    .get(quantale)
                    .ok_or_else(|| anyhow!("semiring {name}: unknown quantale {quantale}"))?;
                SemiringSpec {
                    name: name.clone(),
                    kind: SemiringKind::Quantale(Box::new(q.clone())),
                }
            }
        };
        semirings.insert(name.clone(), s);
    }

    let mut sets = BTreeMap::new();
    for (name, elements) in &file.sets {
        let obj = FinSetObj::new(name, elements.clone()).with_context(|| format!("set {name}"))?;
        sets.insert(name.clone(), obj);
    }
    let lookup_set = |id: &str| -> Result<&ObjRef> {
        sets.get(id).ok_or_else(|| anyhow!("unknown set {id}"))
    };
    let lookup_qdecl = |id: &str| -> Result<&QuantaleDecl> {
        file.quantales
            .get(id)
            .ok_or_else(|| anyhow!("unknown quantale {id}"))
    };

    let mut maps = BTreeMap::new();
    for (name, decl) in &file.maps {
        let dom = lookup_set(&decl.dom).with_context(|| format!("map {name}"))?;
        let cod = lookup_set(&decl.cod).with_context(|| format!("map {name}"))?;
        if decl.table.len() != dom.len() {
            bail!("map {name}: table must list {} images", dom.len());
        }
        let table = decl
            .table
            .iter()
            .map(|e| element_index(cod, e))
            .collect::<Result<Vec<usize>>>()
            .with_context(|| format!("map {name}"))?;
        maps.insert(
            name.clone(),
            FinMap::new(dom.clone(), cod.clone(), table)
                .with_context(|| format!("map {name}"))?,
        );
    }

    for (name, decl) in &file.relations {
        let dom = lookup_set(&decl.dom).with_context(|| format!("relation {name}"))?;
        let cod = lookup_set(&decl.cod).with_context(|| format!("relation {name}"))?;
        let qdecl = lookup_qdecl(&decl.quantale).with_context(|| format!("relation {name}"))?;
        if !quantales.contains_key(&decl.quantale) {
            bail!("relation {name}: unknown quantale {}", decl.quantale);
        }
        parse_matrix(qdecl, dom, cod, &decl.matrix).with_context(|| format!("relation {name}"))?;
    }

    let mut spaces = BTreeMap::new();
    for (name, decl) in &file.metric_spaces {
        let carrier = lookup_set(&decl.carrier).with_context(|| format!("space {name}"))?;
        let qdecl = lookup_qdecl(&decl.quantale).with_context(|| format!("space {name}"))?;
        let q = quantales
            .get(&decl.quantale)
            .ok_or_else(|| anyhow!("space {name}: unknown quantale {}", decl.quantale))?;
        let rho = parse_matrix(qdecl, carrier, carrier, &decl.matrix)
            .with_context(|| format!("space {name}"))?;
        let doc = VRelDoctrine::new(q.clone(), vec![carrier.clone()]);
        let space = vmetric(&doc, carrier, rho).with_context(|| format!("space {name}"))?;
        spaces.insert(name.clone(), (decl.quantale.clone(), space));
    }

    let mut systems = BTreeMap::new();
    for (name, decl) in &file.transition_systems {
        let states = lookup_set(&decl.states).with_context(|| format!("system {name}"))?;
        if decl.succ.len() != states.len() {
            bail!("system {name}: succ must list {} rows", states.len());
        }
        if let Some(qid) = &decl.quantale {
            if !quantales.contains_key(qid) {
                bail!("system {name}: unknown quantale {qid}");
            }
        }
        let succ = decl
            .succ
            .iter()
            .map(|row| row.iter().map(|e| element_index(states, e)).collect())
            .collect::<Result<Vec<Vec<usize>>>>()
            .with_context(|| format!("system {name}"))?;
        let coalg = Coalgebra::new(states.clone(), succ)
            .with_context(|| format!("system {name}"))?;
        systems.insert(name.clone(), (decl.quantale.clone(), coalg));
    }

    let mut algebras = BTreeMap::new();
    for (name, decl) in &file.algebras {
        let carrier = lookup_set(&decl.carrier).with_context(|| format!("algebra {name}"))?;
        let monad = MonadSpec::powerset(VRelDoctrine::boolean(vec![]));
        let ps = monad
            .on_obj(carrier)
            .with_context(|| format!("algebra {name}"))?;
        if decl.structure.len() != ps.len() {
            bail!(
                "algebra {name}: structure must list {} entries, one per subset",
                ps.len()
            );
        }
        let table = decl
            .structure
            .iter()
            .map(|e| element_index(carrier, e))
            .collect::<Result<Vec<usize>>>()
            .with_context(|| format!("algebra {name}"))?;
        let alg = Algebra {
            carrier: carrier.clone(),
            structure: FinMap::new(ps, carrier.clone(), table)
                .with_context(|| format!("algebra {name}"))?,
            free_on: None,
        };
        em_doctrine(monad, vec![alg.clone()]).with_context(|| format!("algebra {name}"))?;
        algebras.insert(name.clone(), alg);
    }

    let mut doctrines = BTreeMap::new();
    for (name, decl) in &file.doctrines {
        let doc = match decl {
            DoctrineDecl::Vrel { quantale, objects } => {
                let q = quantales
                    .get(quantale)
                    .ok_or_else(|| anyhow!("doctrine {name}: unknown quantale {quantale}"))?;
                let objs = objects
                    .iter()
                    .map(|o| lookup_set(o).cloned())
                    .collect::<Result<Vec<ObjRef>>>()
                    .with_context(|| format!("doctrine {name}"))?;
                AnyDoctrine::VRel(VRelDoctrine::new(q.clone(), objs))
            }
            DoctrineDecl::Mat { semiring, objects } => {
                let s = semirings
                    .get(semiring)
                    .ok_or_else(|| anyhow!("doctrine {name}: unknown semiring {semiring}"))?;
                let objs = objects
                    .iter()
                    .map(|o| lookup_set(o).cloned())
                    .collect::<Result<Vec<ObjRef>>>()
                    .with_context(|| format!("doctrine {name}"))?;
                AnyDoctrine::Mat(MatDoctrine::new(s.clone(), objs))
            }
            DoctrineDecl::RmapOrd { quantale, objects } => {
                let q = quantales
                    .get(quantale)
                    .ok_or_else(|| anyhow!("doctrine {name}: unknown quantale {quantale}"))?;
                let objs = objects
                    .iter()
                    .map(|o| lookup_set(o).cloned())
                    .collect::<Result<Vec<ObjRef>>>()
                    .with_context(|| format!("doctrine {name}"))?;
                AnyDoctrine::RMap(rmap_doctrine(VRelDoctrine::new(q.clone(), objs)))
            }
            DoctrineDecl::Builtin { name: builtin } => match builtin.as_str() {
                "not_modular_h" => AnyDoctrine::Presented(
                    build_h_counterexample().with_context(|| format!("doctrine {name}"))?,
                ),
                other => bail!("doctrine {name}: unknown builtin {other}"),
            },
        };
        doctrines.insert(name.clone(), doc);
    }

    Ok(Resolved {
        options,
        quantale_decls: file.quantales.clone(),
        quantales,
        maps,
        spaces,
        systems,
        algebras,
        doctrines,
    })
}
