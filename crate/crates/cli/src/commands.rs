use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use ifalg::closure::{commutator_span, lie_closure, star_closure_report};
use ifalg::interface::{
    check_implementable, check_universal_control, interface_bruteforce, interface_structural,
    structural_dimension, system_algebra, InterfaceOptions,
};
use ifalg::io::{
    read_generators, read_hermitian, read_json, to_json, ChainFile, CouplingFile, HamiltonianInput,
    MatrixJson, MeasurementResultFile, ProcedureFile, SchemeFile, StepJson, SynthesisSpec, VectorJson,
};
use ifalg::measurement::{build_cqnd_scheme, cqnd_check, scheme_commutator, scheme_jordan, scheme_sum, simulate_measurement};
use ifalg::operator::{expm, phase_aligned_distance};
use ifalg::schmidt::{strip_locals, BipartiteHamiltonian};
use ifalg::selftest::{run_criterion, RunConfig, CRITERIA};
use ifalg::spin_chain::{check_cut, verify_theorem2_hypotheses};
use ifalg::synthesis::{
    commutator_step, commutator_target, evaluate_procedure, inversion_sequence, trotter_procedure, weyl_group,
};
use ifalg::{Hermitian, Tolerances};

use crate::{Cli, ClosureKind, Command, ComposeOp, GlobalOpts, SynthesisKind};

/// Outcome of a subcommand; `Holds(false)` maps to exit code 1.
pub enum Verdict {
    Success,
    Holds(bool),
}

/// Joint dimension above which `chain-check` wants `--slow`.
const SLOW_CHAIN_DIM: usize = 16;

pub fn dispatch(cli: &Cli) -> Result<Verdict> {
    let g = &cli.global;
    let cfg = g.config(false);
    cfg.validate()?;
    let tol = cfg.tolerances;
    match &cli.command {
        Command::Decompose { input, dim_c, dim_s } => decompose(g, &tol, input, *dim_c, *dim_s),
        Command::Closure { kind, input } => closure(g, &tol, *kind, input),
        Command::Interface { input, brute_force, dim_c, dim_s } => {
            interface(g, &tol, input, *brute_force, *dim_c, *dim_s)
        }
        Command::CheckControl { input, dim_c, dim_s } => check_control(g, &tol, input, *dim_c, *dim_s),
        Command::CheckMeasure { input, observable, dim_c, dim_s, scheme_out } => {
            check_measure(g, &tol, input, observable, *dim_c, *dim_s, scheme_out.as_deref())
        }
        Command::Synthesize { kind, input } => synthesize(g, &tol, *kind, input),
        Command::SimulateMeasurement { input, state } => simulate(g, &tol, input, state),
        Command::Compose { op, a, b, m } => compose(g, &tol, *op, a, b, *m),
        Command::ChainCheck { spec, cut, slow } => chain_check(g, &tol, spec, *cut, *slow),
        Command::Selftest { slow, only } => selftest(&g.config(*slow), g, only),
    }
}

fn emit(g: &GlobalOpts, value: &Value) -> Result<()> {
    let text = to_json(value)?;
    match &g.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn note(g: &GlobalOpts, msg: &str) {
    if g.verbose {
        eprintln!("{msg}");
    }
}

fn load_hamiltonian(
    path: &Path,
    dim_c: Option<usize>,
    dim_s: Option<usize>,
    tol: &Tolerances,
) -> Result<BipartiteHamiltonian> {
    let input: HamiltonianInput = read_json(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(input.decompose(dim_c, dim_s, tol)?)
}

fn decompose(g: &GlobalOpts, tol: &Tolerances, input: &Path, dc: Option<usize>, ds: Option<usize>) -> Result<Verdict> {
    let h = load_hamiltonian(input, dc, ds, tol)?;
    let terms: Vec<Value> = h
        .terms()
        .iter()
        .map(|t| {
            json!({
                "controller": MatrixJson::from(&t.controller),
                "system": MatrixJson::from(&t.system),
                "singular_value": t.singular_value,
            })
        })
        .collect();
    emit(
        g,
        &json!({
            "dim_c": h.dim_c(),
            "dim_s": h.dim_s(),
            "terms": terms,
            "singular_values": h.singular_values(),
            "local_c": MatrixJson::from(h.local_c()),
            "local_s": MatrixJson::from(h.local_s()),
            "scalar": h.scalar(),
            "stripped": h.is_stripped(1e-10),
            "reconstruction_error": (h.reconstruct() - h.full().clone()).norm(),
            "seed": g.seed,
        }),
    )?;
    Ok(Verdict::Success)
}

fn closure(g: &GlobalOpts, tol: &Tolerances, kind: ClosureKind, input: &Path) -> Result<Verdict> {
    let gens = read_generators(input, tol).with_context(|| format!("reading {}", input.display()))?;
    let report = match kind {
        ClosureKind::Lie => lie_closure(&gens, tol)?,
        ClosureKind::Star => star_closure_report(&gens, tol)?,
    };
    let basis: Vec<MatrixJson> = report.result.basis().iter().map(MatrixJson::from).collect();
    emit(
        g,
        &json!({
            "kind": match kind { ClosureKind::Lie => "lie", ClosureKind::Star => "star" },
            "dim": report.result.dim(),
            "matrix_dim": report.result.dim_matrix(),
            "generations": report.generations,
            "saturated": report.saturated,
            "basis": basis,
            "seed": g.seed,
        }),
    )?;
    Ok(Verdict::Success)
}

fn interface(
    g: &GlobalOpts,
    tol: &Tolerances,
    input: &Path,
    brute_force: bool,
    dc: Option<usize>,
    ds: Option<usize>,
) -> Result<Verdict> {
    let raw = load_hamiltonian(input, dc, ds, tol)?;
    let removed_locals = !raw.is_stripped(1e-10);
    let h = strip_locals(&raw);
    let b = system_algebra(&h, tol)?;
    let l = commutator_span(&b, &b, tol)?;
    let formula_dim = structural_dimension(h.dim_c(), b.dim(), l.dim());
    let mut out = json!({
        "dim_c": h.dim_c(),
        "dim_s": h.dim_s(),
        "locals_removed": removed_locals,
        "dim_b": b.dim(),
        "dim_l": l.dim(),
        "seed": g.seed,
    });
    let mut verdict = true;
    if h.dim_c() < 3 {
        out["structural_applicable"] = json!(false);
        out["note"] = json!(format!("Theorem 1 inapplicable: dim_c = {}", h.dim_c()));
        out["naive_structural_dim"] = json!(formula_dim);
        if brute_force {
            let brute = interface_bruteforce(&h, g.cap, tol)?;
            out["brute_force_dim"] = json!(brute.dim());
            out["dim"] = json!(brute.dim());
        }
    } else {
        let opts = InterfaceOptions { cap: g.cap, brute_force };
        let a = interface_structural(&h, &opts, tol)?;
        out["structural_applicable"] = json!(true);
        out["structural_dim"] = json!(a.structural.dim());
        out["dim"] = json!(a.structural.dim());
        if let Some(brute) = &a.brute {
            out["brute_force_dim"] = json!(brute.dim());
        } else if brute_force {
            out["note"] = json!(format!("brute force skipped: joint dimension above cap {}", g.cap));
        }
        if let Some(agreement) = &a.agreement {
            out["agree"] = json!(agreement.agree);
            out["max_mutual_residual"] = json!(agreement.max_residual);
            verdict = agreement.agree;
        }
    }
    emit(g, &out)?;
    Ok(Verdict::Holds(verdict))
}

fn check_control(g: &GlobalOpts, tol: &Tolerances, input: &Path, dc: Option<usize>, ds: Option<usize>) -> Result<Verdict> {
    let h = strip_locals(&load_hamiltonian(input, dc, ds, tol)?);
    let b = system_algebra(&h, tol)?;
    let full = h.dim_s() * h.dim_s();
    let mut out = json!({
        "dim_c": h.dim_c(),
        "dim_s": h.dim_s(),
        "dim_b": b.dim(),
        "full_dim": full,
        "seed": g.seed,
    });
    let universal = if h.dim_c() >= 3 {
        check_universal_control(&h, tol)?
    } else {
        out["note"] = json!(format!(
            "dim_c = {} < 3: verdict is the system-side algebra check only; \
             the equivalence with universal control needs dim_c >= 3",
            h.dim_c()
        ));
        b.dim() == full
    };
    out["universal"] = json!(universal);
    emit(g, &out)?;
    Ok(Verdict::Holds(universal))
}

fn check_measure(
    g: &GlobalOpts,
    tol: &Tolerances,
    input: &Path,
    observable: &Path,
    dc: Option<usize>,
    ds: Option<usize>,
    scheme_out: Option<&Path>,
) -> Result<Verdict> {
    let h = load_hamiltonian(input, dc, ds, tol)?;
    let a = read_hermitian(observable, tol).with_context(|| format!("reading {}", observable.display()))?;
    let m = check_implementable(&a, &h, tol)?;
    let mut out = json!({
        "measurable": m.contained,
        "residual": m.residual,
        "dim_b": system_algebra(&h, tol)?.dim(),
        "seed": g.seed,
    });
    if h.dim_c() < 3 {
        out["note"] = json!(format!("dim_c = {} < 3: the membership test is necessary only", h.dim_c()));
    }
    if let (Some(path), true) = (scheme_out, m.contained) {
        let scheme = build_cqnd_scheme(&a, h.dim_c())?;
        std::fs::write(path, to_json(&SchemeFile::from_scheme(&scheme, g.seed))?)?;
        out["scheme"] = json!(path.display().to_string());
    }
    emit(g, &out)?;
    Ok(Verdict::Holds(m.contained))
}

fn need<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("spec is missing field {what:?}"))
}

fn synthesize(g: &GlobalOpts, tol: &Tolerances, kind: SynthesisKind, input: &Path) -> Result<Verdict> {
    let spec: SynthesisSpec = read_json(input).with_context(|| format!("reading {}", input.display()))?;
    let file = match kind {
        SynthesisKind::Invert => {
            let m = need(spec.hamiltonian.as_ref(), "hamiltonian")?.to_hermitian(tol)?;
            let eps = need(spec.eps, "eps")?;
            let raw = HamiltonianInput::Bare(MatrixJson::from(&m)).decompose(spec.dim_c, spec.dim_s, tol)?;
            let h = strip_locals(&raw);
            let group = weyl_group(h.dim_c())?;
            let p = inversion_sequence(&h, &group, eps)?;
            let e = evaluate_procedure(&p, &h)?;
            let target = expm(h.full(), -eps);
            ProcedureFile {
                kind: "invert".into(),
                dim_c: h.dim_c(),
                dim_s: h.dim_s(),
                steps: p.steps().iter().map(|s| StepJson { t: s.wait, w: (&s.unitary).into() }).collect(),
                repeat: 1,
                t_p: Some(e.total_time),
                error: phase_aligned_distance(e.unitary.matrix(), target.matrix()),
                unitary: (&e.unitary).into(),
                target: (&target).into(),
                error_bound: None,
                seed: g.seed,
            }
        }
        SynthesisKind::Trotter => {
            let m = need(spec.m, "m")?;
            if spec.terms.is_empty() {
                bail!("spec is missing field \"terms\"");
            }
            let terms = spec
                .terms
                .iter()
                .map(|t| Ok((t.generator.to_hermitian(tol)?, t.coefficient)))
                .collect::<Result<Vec<(Hermitian, f64)>>>()?;
            let r = trotter_procedure(&terms, m)?;
            let dim = terms[0].0.dim();
            ProcedureFile {
                kind: "trotter".into(),
                dim_c: dim,
                dim_s: 1,
                steps: terms
                    .iter()
                    .map(|(gk, ck)| StepJson { t: ck / m as f64, w: (&expm(gk, ck / m as f64)).into() })
                    .collect(),
                repeat: m,
                t_p: Some(terms.iter().map(|(_, c)| c.abs()).sum()),
                unitary: (&r.unitary).into(),
                target: (&r.target).into(),
                error: r.error,
                error_bound: Some(r.error_bound),
                seed: g.seed,
            }
        }
        SynthesisKind::Commutator => {
            let m = need(spec.m, "m")?;
            let a = need(spec.a.as_ref(), "a")?.to_hermitian(tol)?;
            let b = need(spec.b.as_ref(), "b")?.to_hermitian(tol)?;
            let tau = 1.0 / m as f64;
            let step = commutator_step(&a, &b, m)?;
            let unitary = step.pow(m * m);
            let target = commutator_target(&a, &b)?;
            ProcedureFile {
                kind: "commutator".into(),
                dim_c: a.dim(),
                dim_s: 1,
                steps: [(&a, tau), (&b, tau), (&a, -tau), (&b, -tau)]
                    .iter()
                    .map(|(x, t)| StepJson { t: *t, w: (&expm(x, *t)).into() })
                    .collect(),
                repeat: m * m,
                t_p: None,
                error: phase_aligned_distance(unitary.matrix(), target.matrix()),
                unitary: (&unitary).into(),
                target: (&target).into(),
                error_bound: None,
                seed: g.seed,
            }
        }
    };
    note(g, &format!("error against target: {:.3e}", file.error));
    emit(g, &serde_json::to_value(&file)?)?;
    Ok(Verdict::Success)
}

fn simulate(g: &GlobalOpts, tol: &Tolerances, input: &Path, state: &Path) -> Result<Verdict> {
    let file: SchemeFile = read_json(input).with_context(|| format!("reading {}", input.display()))?;
    let scheme = file.to_scheme(tol)?;
    let psi = read_json::<VectorJson>(state)
        .with_context(|| format!("reading {}", state.display()))?
        .to_vector()?;
    let r = simulate_measurement(&scheme, &psi)?;
    let disturbance = cqnd_check(&scheme, &scheme.observable, 20)?;
    let out = MeasurementResultFile::new(&scheme, &r, disturbance, g.seed);
    emit(g, &serde_json::to_value(&out)?)?;
    Ok(Verdict::Success)
}

fn read_coupling(path: &Path, tol: &Tolerances) -> Result<(Hermitian, Hermitian)> {
    let c: CouplingFile = read_json(path).with_context(|| format!("reading {}", path.display()))?;
    Ok((c.controller.to_hermitian(tol)?, c.system.to_hermitian(tol)?))
}

fn compose(g: &GlobalOpts, tol: &Tolerances, op: ComposeOp, a: &Path, b: &Path, m: u64) -> Result<Verdict> {
    let (e, x) = read_coupling(a, tol)?;
    let (f, y) = read_coupling(b, tol)?;
    let scheme = match op {
        ComposeOp::Sum => scheme_sum((&e, &x), (&f, &y), m)?,
        ComposeOp::Commutator => scheme_commutator((&e, &x), (&f, &y), m)?,
        ComposeOp::Jordan => scheme_jordan((&e, &x), (&f, &y), m)?,
    };
    emit(g, &serde_json::to_value(SchemeFile::from_scheme(&scheme, g.seed))?)?;
    Ok(Verdict::Success)
}

fn chain_check(g: &GlobalOpts, tol: &Tolerances, spec: &Path, cut: usize, slow: bool) -> Result<Verdict> {
    let file: ChainFile = read_json(spec).with_context(|| format!("reading {}", spec.display()))?;
    let chain = file.to_spec(tol)?;
    if chain.total_dim() > SLOW_CHAIN_DIM && !slow {
        bail!(
            "joint dimension {} needs a closure inside su({0}); rerun with --slow",
            chain.total_dim()
        );
    }
    let hyp = verify_theorem2_hypotheses(&chain, tol)?;
    let started = std::time::Instant::now();
    let r = check_cut(&chain, cut, g.cap, tol)?;
    note(g, &format!("closure took {:.2}s", started.elapsed().as_secs_f64()));
    let sites: Vec<Value> = hyp
        .sites
        .iter()
        .map(|s| json!({ "site": s.site, "dim": s.dim, "passed": s.passed }))
        .collect();
    let couplings: Vec<Value> = hyp
        .couplings
        .iter()
        .map(|c| {
            json!({
                "bond": c.bond,
                "a_max_trace": c.a_max_trace,
                "a_independence": c.a_independence,
                "b_closure_dim": c.b_closure_dim,
                "b_full_dim": c.b_full_dim,
                "passed": c.passed,
            })
        })
        .collect();
    emit(
        g,
        &json!({
            "site_dims": chain.site_dims(),
            "cut": cut,
            "hypotheses": { "sites": sites, "couplings": couplings, "all_passed": hyp.all_passed() },
            "closure_dim": r.closure_dim,
            "full_dim": r.full_dim,
            "controllable": r.controllable,
            "seed": g.seed,
        }),
    )?;
    Ok(Verdict::Holds(r.controllable))
}

fn selftest(cfg: &RunConfig, g: &GlobalOpts, only: &[usize]) -> Result<Verdict> {
    cfg.validate()?;
    let ids: Vec<usize> = if only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { only.to_vec() };
    let mut rows = Vec::new();
    let mut failing = Vec::new();
    for id in ids {
        let r = run_criterion(id, cfg);
        eprintln!("{r}");
        if !r.passed {
            failing.push(id);
        }
        rows.push(json!({
            "id": r.id,
            "name": r.name,
            "passed": r.passed,
            "detail": r.detail,
            "seconds": r.elapsed.as_secs_f64(),
        }));
    }
    if failing.is_empty() {
        eprintln!("all {} criteria passed", rows.len());
    } else {
        eprintln!("failing criteria: {failing:?}");
    }
    emit(
        g,
        &json!({ "criteria": rows, "failing": failing, "seed": cfg.seed, "slow": cfg.slow }),
    )?;
    Ok(Verdict::Holds(failing.is_empty()))
}
