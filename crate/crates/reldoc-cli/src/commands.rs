//! Subcommand implementations. Each returns the rendered output and an
//! overall verdict; `main` maps `Ok(true)` to exit 0, `Ok(false)` to
//! exit 1 and `Err` to exit 2.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Result};
use serde::Serialize;

use reldoc_core::doctrine::{
    check_doctrine_laws, graph, is_injective, is_surjective, CartesianBase, CheckBudget, Doctrine,
    FinMap, VRelDoctrine,
};
use reldoc_core::extensional::{is_separated, separation_quotient};
use reldoc_core::lifting::{greatest_bisimulation, BisimOptions, HausdorffLifting};
use reldoc_core::projalg::{counit_quotient_check, em_doctrine, MonadSpec};
use reldoc_core::quotient::{build_quotient_vrel, factorize, quotient_cert};
use reldoc_core::structure::{
    check_beck_chevalley, check_cartesian, check_frobenius, check_modular,
    check_predicate_correspondence, check_ruc, check_ruc_all,
};
use reldoc_core::valuealg::Value;
use reldoc_core::DocError;

use crate::instance::{value_json, AnyDoctrine, QuantaleDecl, Resolved, SCHEMA_VERSION};
use crate::output::{render_json, Entry, LawsOutput, Section};

pub struct LawFlags {
    pub cartesian: bool,
    pub frobenius: bool,
    pub modular: bool,
    pub ruc: bool,
}

fn entries_of(rep: &reldoc_core::LawReport) -> Vec<Entry> {
    rep.entries.iter().map(Entry::from_law).collect()
}

fn modular_entry<D: Doctrine>(doc: &D, budget: &CheckBudget) -> Result<Entry> {
    let (ok, w) = check_modular(doc, budget)?;
    Ok(Entry::flag("modular-law", "sampled triples", ok, w))
}

fn ruc_entry<D: Doctrine>(doc: &D, budget: &CheckBudget) -> Result<Entry> {
    match check_ruc_all(doc, budget.hom_cap) {
        Ok((ok, w)) => Ok(Entry::flag("unique-choice", "all object pairs", ok, w)),
        Err(DocError::CapExceeded(m)) => Ok(Entry::skipped("unique-choice", "all object pairs", m)),
        Err(e) => Err(e.into()),
    }
}

fn cartesian_entries<D: Doctrine + CartesianBase>(
    doc: &D,
    budget: &CheckBudget,
) -> Result<Vec<Entry>> {
    let mut out = entries_of(&check_cartesian(doc, budget)?);
    out.extend(entries_of(&check_beck_chevalley(doc, budget)?));
    Ok(out)
}

const NO_PRODUCTS: &str = "no chosen products on this doctrine";

// ---------------------------------------------------------------------------
// check-laws
// ---------------------------------------------------------------------------

fn check_laws_entries<D: Doctrine>(
    doc: &D,
    budget: &CheckBudget,
    flags: &LawFlags,
) -> Result<Vec<Entry>> {
    let mut out = entries_of(&check_doctrine_laws(doc, budget)?);
    if flags.frobenius {
        out.extend(entries_of(&check_frobenius(doc, budget)?));
    }
    if flags.modular {
        out.push(modular_entry(doc, budget)?);
    }
    if flags.ruc {
        out.push(ruc_entry(doc, budget)?);
    }
    Ok(out)
}

pub fn check_laws(
    res: &Resolved,
    targets: &[String],
    flags: &LawFlags,
    json: bool,
) -> Result<(String, bool)> {
    let budget = res.options.budget();
    let names: Vec<&String> = if targets.is_empty() {
        res.doctrines.keys().collect()
    } else {
        for t in targets {
            if !res.doctrines.contains_key(t) {
                bail!("unknown doctrine {t}");
            }
        }
        targets.iter().collect()
    };
    let mut sections = Vec::new();
    for name in names {
        let doc = &res.doctrines[name];
        let mut entries = match doc {
            AnyDoctrine::VRel(d) => check_laws_entries(d, &budget, flags)?,
            AnyDoctrine::Mat(d) => check_laws_entries(d, &budget, flags)?,
            AnyDoctrine::Presented(d) => check_laws_entries(d, &budget, flags)?,
            AnyDoctrine::RMap(d) => check_laws_entries(d, &budget, flags)?,
        };
        if flags.cartesian {
            let extra = match doc {
                AnyDoctrine::VRel(d) => cartesian_entries(d, &budget)?,
                AnyDoctrine::Presented(d) => cartesian_entries(d, &budget)?,
                _ => vec![Entry::skipped(
                    "cartesian-structure",
                    "whole doctrine",
                    NO_PRODUCTS.to_string(),
                )],
            };
            entries.extend(extra);
        }
        sections.push(Section {
            subject: format!("doctrine {name}"),
            entries,
        });
    }
    let out = LawsOutput::new("check-laws", res.options.seed, sections);
    let ok = out.ok;
    Ok((out.render(json)?, ok))
}

// ---------------------------------------------------------------------------
// quotient / separate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MapJson {
    dom: String,
    cod: String,
    table: Vec<String>,
}

fn map_json(f: &FinMap) -> MapJson {
    MapJson {
        dom: f.dom.name.clone(),
        cod: f.cod.name.clone(),
        table: f
            .table
            .iter()
            .map(|&j| f.cod.elements[j].clone())
            .collect(),
    }
}

#[derive(Serialize)]
struct QuotientOutput {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    space: String,
    classes: Vec<String>,
    q: MapJson,
    closure_added: bool,
    quotient: bool,
    effective: bool,
    descent: bool,
}

pub fn quotient(res: &Resolved, space_name: &str, json: bool) -> Result<(String, bool)> {
    let (qid, space) = res
        .spaces
        .get(space_name)
        .ok_or_else(|| anyhow!("unknown metric space {space_name}"))?;
    let q = &res.quantales[qid];
    let doc = VRelDoctrine::new(q.clone(), vec![space.base.clone()]);
    let built = build_quotient_vrel(&doc, space)?;
    let doc2 = VRelDoctrine::new(
        q.clone(),
        vec![space.base.clone(), built.map.cod.clone()],
    );
    let cert = quotient_cert(
        &doc2,
        &built.map,
        &space.rho,
        &[space.base.clone(), built.map.cod.clone()],
        &res.options.budget(),
    )?;
    let out = QuotientOutput {
        schema_version: SCHEMA_VERSION,
        command: "quotient",
        seed: res.options.seed,
        space: space_name.to_string(),
        classes: built.map.cod.elements.clone(),
        q: map_json(&built.map),
        closure_added: built.closure_added,
        quotient: cert.is_quotient,
        effective: cert.effective,
        descent: cert.descent,
    };
    let rendered = if json {
        render_json(&out)?
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "quotient of {space_name} (seed {})", out.seed);
        let _ = writeln!(s, "classes: {}", out.classes.join(" "));
        for (i, img) in out.q.table.iter().enumerate() {
            let _ = writeln!(s, "  {} -> {img}", space.base.elements[i]);
        }
        let _ = writeln!(s, "closure_added: {}", out.closure_added);
        let _ = writeln!(
            s,
            "quotient: {}  effective: {}  descent: {}",
            out.quotient, out.effective, out.descent
        );
        s
    };
    Ok((rendered, true))
}

#[derive(Serialize)]
struct SeparateOutput {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    space: String,
    was_separated: bool,
    carrier: Vec<String>,
    matrix: Vec<Vec<serde_json::Value>>,
    projection: MapJson,
    separated: bool,
}

pub fn separate(res: &Resolved, space_name: &str, json: bool) -> Result<(String, bool)> {
    let (qid, space) = res
        .spaces
        .get(space_name)
        .ok_or_else(|| anyhow!("unknown metric space {space_name}"))?;
    let qdecl = &res.quantale_decls[qid];
    let q = &res.quantales[qid];
    let doc = VRelDoctrine::new(q.clone(), vec![space.base.clone()]);
    let was_separated = is_separated(&doc, space)?;
    let (proj, sep) = separation_quotient(&doc, space)?;
    let separated = is_separated(&doc, &sep)?;
    let n = sep.base.len();
    let matrix: Vec<Vec<serde_json::Value>> = (0..n)
        .map(|i| (0..n).map(|j| value_json(qdecl, &sep.rho.get(i, j))).collect())
        .collect();
    let out = SeparateOutput {
        schema_version: SCHEMA_VERSION,
        command: "separate",
        seed: res.options.seed,
        space: space_name.to_string(),
        was_separated,
        carrier: sep.base.elements.clone(),
        matrix,
        projection: map_json(&proj),
        separated,
    };
    let rendered = if json {
        render_json(&out)?
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "separation of {space_name} (seed {})", out.seed);
        let _ = writeln!(s, "was_separated: {}", out.was_separated);
        let _ = writeln!(s, "carrier: {}", out.carrier.join(" "));
        for (i, row) in out.matrix.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "  {}: {}", out.carrier[i], cells.join(" "));
        }
        for (i, img) in out.projection.table.iter().enumerate() {
            let _ = writeln!(s, "  {} -> {img}", space.base.elements[i]);
        }
        let _ = writeln!(s, "separated: {}", out.separated);
        s
    };
    Ok((rendered, true))
}

// ---------------------------------------------------------------------------
// factorize
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FactorizeOutput {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    map: String,
    classes: Vec<String>,
    q: MapJson,
    incl: MapJson,
    surjection: bool,
    injection: bool,
    composite: bool,
    ok: bool,
}

pub fn factorize_map(res: &Resolved, map_name: &str, json: bool) -> Result<(String, bool)> {
    let f = res
        .maps
        .get(map_name)
        .ok_or_else(|| anyhow!("unknown map {map_name}"))?;
    let doc = VRelDoctrine::boolean(vec![f.dom.clone(), f.cod.clone()]);
    let (q, incl) = factorize(&doc, f)?;
    let surjection = is_surjective(&doc, &graph(&doc, &q)?)?;
    let injection = is_injective(&doc, &graph(&doc, &incl)?)?;
    let composite = q.then(&incl)? == *f;
    let ok = surjection && injection && composite;
    let out = FactorizeOutput {
        schema_version: SCHEMA_VERSION,
        command: "factorize",
        seed: res.options.seed,
        map: map_name.to_string(),
        classes: q.cod.elements.clone(),
        q: map_json(&q),
        incl: map_json(&incl),
        surjection,
        injection,
        composite,
        ok,
    };
    let rendered = if json {
        render_json(&out)?
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "factorization of {map_name} (seed {})", out.seed);
        let _ = writeln!(s, "classes: {}", out.classes.join(" "));
        for (i, img) in out.q.table.iter().enumerate() {
            let _ = writeln!(s, "  {} -> {img}", f.dom.elements[i]);
        }
        for (i, img) in out.incl.table.iter().enumerate() {
            let _ = writeln!(s, "  {} -> {img}", out.classes[i]);
        }
        let _ = writeln!(
            s,
            "surjection: {}  injection: {}  composite: {}",
            out.surjection, out.injection, out.composite
        );
        let _ = writeln!(s, "result: {}", if ok { "ok" } else { "fail" });
        s
    };
    Ok((rendered, ok))
}

// ---------------------------------------------------------------------------
// bisim
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BisimOutput {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    left: String,
    right: String,
    tag: &'static str,
    converged: bool,
    iterations: usize,
    matrix: Vec<Vec<serde_json::Value>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    related: Option<Vec<[String; 2]>>,
}

pub fn bisim(res: &Resolved, left: &str, right: &str, json: bool) -> Result<(String, bool)> {
    let (lq, lc) = res
        .systems
        .get(left)
        .ok_or_else(|| anyhow!("unknown transition system {left}"))?;
    let (rq, rc) = res
        .systems
        .get(right)
        .ok_or_else(|| anyhow!("unknown transition system {right}"))?;
    if lq != rq {
        bail!("systems {left} and {right} use different value quantales");
    }
    let (qdecl, qspec) = match lq {
        None => (QuantaleDecl::Boolean, reldoc_core::valuealg::QuantaleSpec::boolean()),
        Some(id) => (res.quantale_decls[id].clone(), res.quantales[id].clone()),
    };
    let boolean = matches!(qdecl, QuantaleDecl::Boolean);
    let doc = VRelDoctrine::new(qspec, vec![lc.carrier.clone(), rc.carrier.clone()]);
    let lift = HausdorffLifting::new(doc);
    let opts = BisimOptions {
        max_iter: res.options.max_iter,
        ..Default::default()
    };
    let outcome = greatest_bisimulation(&lift, lc, rc, &opts)?;
    let (nl, nr) = (lc.carrier.len(), rc.carrier.len());
    let matrix: Vec<Vec<serde_json::Value>> = (0..nl)
        .map(|i| {
            (0..nr)
                .map(|j| value_json(&qdecl, &outcome.rel.get(i, j)))
                .collect()
        })
        .collect();
    let related = boolean.then(|| {
        let mut pairs = Vec::new();
        for i in 0..nl {
            for j in 0..nr {
                if matches!(outcome.rel.get(i, j), Value::Idx(1)) {
                    pairs.push([
                        lc.carrier.elements[i].clone(),
                        rc.carrier.elements[j].clone(),
                    ]);
                }
            }
        }
        pairs
    });
    let out = BisimOutput {
        schema_version: SCHEMA_VERSION,
        command: "bisim",
        seed: res.options.seed,
        left: left.to_string(),
        right: right.to_string(),
        tag: if outcome.exact { "exact" } else { "approximate" },
        converged: outcome.converged,
        iterations: outcome.iterations,
        matrix,
        related,
    };
    let rendered = if json {
        render_json(&out)?
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "bisim {left} ~ {right} (seed {})", out.seed);
        let _ = writeln!(
            s,
            "tag: {}  converged: {}  iterations: {}",
            out.tag, out.converged, out.iterations
        );
        for (i, row) in out.matrix.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "  {}: {}", lc.carrier.elements[i], cells.join(" "));
        }
        if let Some(pairs) = &out.related {
            let fmt: Vec<String> = pairs.iter().map(|[a, b]| format!("{a}~{b}")).collect();
            let _ = writeln!(s, "related: {}", fmt.join(" "));
        }
        s
    };
    Ok((rendered, true))
}

// ---------------------------------------------------------------------------
// ruc
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RucOutput {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    doctrine: String,
    x: String,
    y: String,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<String>,
}

fn ruc_on<D: Doctrine>(
    doc: &D,
    res: &Resolved,
    dname: &str,
    xname: &str,
    yname: &str,
    json: bool,
) -> Result<(String, bool)> {
    let find = |n: &str| -> Result<D::O> {
        doc.objects()
            .into_iter()
            .find(|o| doc.obj_label(o) == n)
            .ok_or_else(|| anyhow!("doctrine {dname} has no object {n}"))
    };
    let x = find(xname)?;
    let y = find(yname)?;
    let (holds, witness) = check_ruc(doc, &x, &y, res.options.hom_cap)?;
    let out = RucOutput {
        schema_version: SCHEMA_VERSION,
        command: "ruc",
        seed: res.options.seed,
        doctrine: dname.to_string(),
        x: xname.to_string(),
        y: yname.to_string(),
        holds,
        witness,
    };
    let rendered = if json {
        render_json(&out)?
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "unique choice on ({xname},{yname}) in {dname}");
        let _ = writeln!(s, "holds: {holds}");
        if let Some(w) = &out.witness {
            let _ = writeln!(s, "witness: {w}");
        }
        s
    };
    Ok((rendered, holds))
}

pub fn ruc(
    res: &Resolved,
    dname: &str,
    xname: &str,
    yname: &str,
    json: bool,
) -> Result<(String, bool)> {
    let doc = res
        .doctrines
        .get(dname)
        .ok_or_else(|| anyhow!("unknown doctrine {dname}"))?;
    match doc {
        AnyDoctrine::VRel(d) => ruc_on(d, res, dname, xname, yname, json),
        AnyDoctrine::Mat(d) => ruc_on(d, res, dname, xname, yname, json),
        AnyDoctrine::Presented(d) => ruc_on(d, res, dname, xname, yname, json),
        AnyDoctrine::RMap(d) => ruc_on(d, res, dname, xname, yname, json),
    }
}

// ---------------------------------------------------------------------------
// algebras check / report
// ---------------------------------------------------------------------------

fn algebra_section(
    name: &str,
    alg: &reldoc_core::projalg::Algebra,
    budget: &CheckBudget,
) -> Result<Section> {
    let monad = MonadSpec::powerset(VRelDoctrine::boolean(vec![]));
    let em = em_doctrine(monad, vec![alg.clone()])?;
    let mut entries = vec![Entry::flag("algebra-laws", &alg.label(), true, None)];
    let alg_budget = CheckBudget {
        fibre_cap: 70_000,
        ..*budget
    };
    match counit_quotient_check(&em, alg, &alg_budget) {
        Ok(rep) => entries.extend(entries_of(&rep)),
        Err(DocError::CapExceeded(m)) => {
            entries.push(Entry::skipped("counit-quotient", &alg.label(), m))
        }
        Err(e) => return Err(e.into()),
    }
    Ok(Section {
        subject: format!("algebra {name}"),
        entries,
    })
}

pub fn algebras_check(res: &Resolved, json: bool) -> Result<(String, bool)> {
    let budget = res.options.budget();
    let mut sections = Vec::new();
    for (name, alg) in &res.algebras {
        sections.push(algebra_section(name, alg, &budget)?);
    }
    let out = LawsOutput::new("algebras check", res.options.seed, sections);
    let ok = out.ok;
    Ok((out.render(json)?, ok))
}

fn report_base<D: Doctrine>(doc: &D, budget: &CheckBudget) -> Result<Vec<Entry>> {
    let mut out = entries_of(&check_doctrine_laws(doc, budget)?);
    out.extend(entries_of(&check_frobenius(doc, budget)?));
    out.push(modular_entry(doc, budget)?);
    Ok(out)
}

fn report_cartesian<D: Doctrine + CartesianBase>(
    doc: &D,
    budget: &CheckBudget,
) -> Result<Vec<Entry>> {
    let mut out = cartesian_entries(doc, budget)?;
    match check_predicate_correspondence(doc, budget) {
        Ok(rep) => out.extend(entries_of(&rep)),
        Err(DocError::PreconditionFailed(m)) => out.push(Entry::skipped(
            "predicate-correspondence",
            "whole doctrine",
            m,
        )),
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}

pub fn report(res: &Resolved, json: bool) -> Result<(String, bool)> {
    let budget = res.options.budget();
    let mut sections = Vec::new();
    for (name, doc) in &res.doctrines {
        let entries = match doc {
            AnyDoctrine::VRel(d) => {
                let mut e = report_base(d, &budget)?;
                e.extend(report_cartesian(d, &budget)?);
                e.push(ruc_entry(d, &budget)?);
                e
            }
            AnyDoctrine::Presented(d) => {
                let mut e = report_base(d, &budget)?;
                e.extend(report_cartesian(d, &budget)?);
                e.push(ruc_entry(d, &budget)?);
                e
            }
            AnyDoctrine::Mat(d) => {
                let mut e = report_base(d, &budget)?;
                e.push(ruc_entry(d, &budget)?);
                e
            }
            AnyDoctrine::RMap(d) => {
                let mut e = report_base(d, &budget)?;
                e.push(ruc_entry(d, &budget)?);
                e
            }
        };
        sections.push(Section {
            subject: format!("doctrine {name}"),
            entries,
        });
    }
    for (name, alg) in &res.algebras {
        sections.push(algebra_section(name, alg, &budget)?);
    }
    let mut data = Vec::new();
    for (name, (qid, space)) in &res.spaces {
        let q = &res.quantales[qid];
        let doc = VRelDoctrine::new(q.clone(), vec![space.base.clone()]);
        let built = build_quotient_vrel(&doc, space)?;
        let doc2 = VRelDoctrine::new(
            q.clone(),
            vec![space.base.clone(), built.map.cod.clone()],
        );
        let cert = quotient_cert(
            &doc2,
            &built.map,
            &space.rho,
            &[space.base.clone(), built.map.cod.clone()],
            &budget,
        )?;
        data.push(serde_json::json!({
            "kind": "metric_space",
            "space": name,
            "separated": is_separated(&doc, space)?,
            "classes": built.map.cod.len(),
            "closure_added": built.closure_added,
            "quotient": cert.is_quotient,
            "effective": cert.effective,
            "descent": cert.descent,
        }));
    }
    for (name, (qid, sys)) in &res.systems {
        let qspec = match qid {
            None => reldoc_core::valuealg::QuantaleSpec::boolean(),
            Some(id) => res.quantales[id].clone(),
        };
        let doc = VRelDoctrine::new(qspec.clone(), vec![sys.carrier.clone()]);
        let lift = HausdorffLifting::new(doc);
        let opts = BisimOptions {
            max_iter: res.options.max_iter,
            ..Default::default()
        };
        let outcome = greatest_bisimulation(&lift, sys, sys, &opts)?;
        let n = sys.carrier.len();
        let mut related = 0usize;
        for i in 0..n {
            for j in 0..n {
                if qspec.leq(qspec.unit(), outcome.rel.get(i, j)) {
                    related += 1;
                }
            }
        }
        data.push(serde_json::json!({
            "kind": "transition_system",
            "system": name,
            "tag": if outcome.exact { "exact" } else { "approximate" },
            "iterations": outcome.iterations,
            "self_related_pairs": related,
        }));
    }
    let mut out = LawsOutput::new("report", res.options.seed, sections);
    out.data = data;
    let ok = out.ok;
    Ok((out.render(json)?, ok))
}
