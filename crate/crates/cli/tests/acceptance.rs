//! Acceptance run: one PASS/FAIL line per criterion; exits non-zero if any fails.

mod oracle;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use oracle::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relbound_cli::run::TaskReport;
use relbound_cli::{evaluate, task_from_flags, Overrides, RunOutcome, Status, TaskKind};
use relbound_core::cluster::{
    enumerate_polymers, t_prime_audit, weight_bound_audit, ursell_coefficient, Atom, Configuration, EnumerationOptions,
    Graph, Propagators,
};
use relbound_core::report::{format_float, to_json};

const DECOMPOSITION_TOL: f64 = 1e-10;
const DECOMPOSITION_SECONDS: f64 = 10.0;
const FACTORIZATION_TOL: f64 = 1e-12;
const FACTORIZATION_PAIRS: usize = 50;
const FACTORIZATION_SECONDS: f64 = 30.0;
const WEIGHT_BOUND_MAX_SUPPORT: usize = 6;
const GAP_RATE_REL_TOL: f64 = 0.05;
const AKLT_TOL: f64 = 1e-10;
const GRAM_RATE_REL_TOL: f64 = 0.10;
const AKLT_SECONDS: f64 = 600.0;

struct Outcome {
    pass: bool,
    detail: String,
    /// Serialized result used by the determinism criterion.
    artifact: String,
}

fn outcome(failures: Vec<String>, detail: String, artifact: String) -> Outcome {
    let pass = failures.is_empty();
    let detail = if pass { detail } else { format!("{detail}; {}", failures.join("; ")) };
    Outcome { pass, detail, artifact }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn artifact_of(run: &RunOutcome) -> String {
    let mut s = run.summary_json.clone();
    for (kind, table) in &run.tables {
        s.push_str(kind.name());
        s.push_str(&table.to_csv());
    }
    s
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let mut errs = vec![];
    let mut failures = vec![];
    for seed in 0..3 {
        let (model, local) = random_pair_model(4, 0.1, 0.05, seed);
        let oracle = hermitian_fn(&ring_sum(&local, 2, 4, 2), |e| (-model.t0 * e).exp());
        let props = Propagators::new(&model).unwrap();
        let sum = model
            .volume()
            .all_sites()
            .subsets()
            .fold(M::zeros(16, 16), |acc, i| acc + props.t(i));
        let err = max_abs_diff(&sum, &oracle);
        if err > DECOMPOSITION_TOL {
            failures.push(format!("seed {seed}: error {err:.3e}"));
        }
        errs.push(err);
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= DECOMPOSITION_SECONDS {
        failures.push(format!("runtime {secs:.1} s"));
    }
    let worst = errs.iter().copied().fold(0.0, f64::max);
    outcome(
        failures,
        format!("|Λ| = 4, d = 2, 3 random certified models: max entry error {worst:.2e} ({secs:.2} s)"),
        to_json(&errs).unwrap(),
    )
}

fn shifted(c: &Configuration, shift: usize, n: usize) -> Option<Configuration> {
    let atoms: Vec<Atom> = c.atoms().into_iter().map(|a| Atom::new(a.slice + shift, a.kind, a.site)).collect();
    atoms.iter().all(|a| a.slice <= n).then(|| Configuration::from_atoms(n, &atoms))
}

fn criterion2() -> Outcome {
    const N: usize = 3;
    let start = Instant::now();
    let model = random_site_model(6, 21);
    let props = Propagators::new(&model).unwrap();
    let set = enumerate_polymers(&model, N, EnumerationOptions::new(8)).unwrap();
    let active: Vec<_> = set.active().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut failures = vec![];
    let mut records = vec![];
    let (mut worst, mut nonzero, mut overlapping, mut attempts) = (0f64, 0, 0, 0);
    while records.len() < FACTORIZATION_PAIRS && attempts < 100_000 && !active.is_empty() {
        attempts += 1;
        let p = active[rng.gen_range(0..active.len())];
        let q = active[rng.gen_range(0..active.len())];
        let (Some(c1), Some(c2)) = (
            shifted(&p.config, rng.gen_range(0..N), N),
            shifted(&q.config, rng.gen_range(0..N), N),
        ) else {
            continue;
        };
        let Ok(both) = c1.union(&c2, &model.geometry) else {
            continue;
        };
        let prod = props.weight(&c1).unwrap() * props.weight(&c2).unwrap();
        let w12 = props.weight(&both).unwrap();
        let rel = (w12 - prod).norm() / prod.norm().max(1.0);
        worst = worst.max(rel);
        if prod.norm() > 1e-12 {
            nonzero += 1;
        }
        let ((a0, a1), (b0, b1)) = (c1.time_span().unwrap(), c2.time_span().unwrap());
        if a0 <= b1 && b0 <= a1 {
            overlapping += 1;
        }
        records.push([w12.re, w12.im, prod.re, prod.im]);
    }
    if records.len() < FACTORIZATION_PAIRS {
        failures.push(format!("only {} disjoint pairs drawn", records.len()));
    }
    if overlapping < 10 {
        failures.push(format!("only {overlapping} pairs overlap in time"));
    }
    if worst > FACTORIZATION_TOL {
        failures.push(format!("defect {worst:.3e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= FACTORIZATION_SECONDS {
        failures.push(format!("runtime {secs:.1} s"));
    }
    outcome(
        failures,
        format!(
            "|Λ| = 6, N = 3, {} disjoint pairs ({nonzero} with non-zero product, {overlapping} overlapping in time): max defect {worst:.2e} ({secs:.2} s)",
            records.len()
        ),
        to_json(&records).unwrap(),
    )
}

fn criterion3() -> Outcome {
    let mut failures = vec![];
    let mut norms = vec![];
    let (small, _) = two_level_model(3);
    let (pair, _) = random_pair_model(4, 0.1, 0.05, 11);
    let mut t_prime_checked = 0;
    for model in [&small, &pair] {
        for i in model.volume().all_sites().subsets().filter(|i| i.len() <= 2) {
            let a = t_prime_audit(model, i).unwrap();
            if !a.ok {
                failures.push(format!("norm bound on T' at I = {:?}: {} > {}", i, a.norm, a.bound));
            }
            norms.push(a.norm);
            t_prime_checked += 1;
        }
    }
    let set = enumerate_polymers(&small, WEIGHT_BOUND_MAX_SUPPORT - 1, EnumerationOptions::new(WEIGHT_BOUND_MAX_SUPPORT)).unwrap();
    let rows = weight_bound_audit(&small, &set);
    let violations = rows.iter().filter(|r| !r.ok).count();
    if violations > 0 {
        failures.push(format!("{violations} weight-bound violations"));
    }
    if set.active().count() == 0 {
        failures.push("no polymers with non-zero weight".into());
    }
    norms.extend(rows.iter().map(|r| r.weight));
    outcome(
        failures,
        format!(
            "norm of T': {t_prime_checked} sets with |I| ≤ 2; weight bound: {} polymers with |supp| ≤ {WEIGHT_BOUND_MAX_SUPPORT}; {violations} violations",
            rows.len()
        ),
        to_json(&norms).unwrap(),
    )
}

fn criterion4() -> Outcome {
    let spec = task_from_flags(
        TaskKind::Expand,
        &Overrides {
            model: Some(data("two_site.json")),
            n: Some(8),
            max_support: Some(8),
            ..Default::default()
        },
    )
    .unwrap();
    let run = evaluate(&spec);
    let mut failures = vec![];
    let Some(TaskReport::Expand(rep)) = &run.report else {
        return outcome(vec![format!("expand failed: {:?}", run.failures)], String::new(), artifact_of(&run));
    };
    let (model, local) = two_level_model(2);
    if model.alpha > 0.1 || model.beta > 0.05 {
        failures.push("model outside α ≤ 0.1, β ≤ 0.05".into());
    }
    let h = ring_sum(&local, 1, 2, 2);
    let mut worst = 0f64;
    for row in rep.rows.iter().filter(|r| (4..=8).contains(&r.n)) {
        let exact = ln_z(&h, model.t0, row.n);
        let err = (row.linear - exact).abs();
        worst = worst.max(err / row.bound);
        if err > row.bound {
            failures.push(format!("N = {}: error {err:.3e} > bound {:.3e}", row.n, row.bound));
        }
    }
    let e = eigenvalues(&h);
    let gap = e[1] - e[0];
    let a3 = rep.a3_fit.as_ref().map(|f| f.rate / model.t0).unwrap_or(f64::NAN);
    let rel = (a3 - gap).abs() / gap;
    if !(rel <= GAP_RATE_REL_TOL) {
        failures.push(format!("a3/t0 = {a3} vs gap {gap}"));
    }
    if run.status != Status::Ok {
        failures.push(format!("status {}", run.status.name()));
    }
    outcome(
        failures,
        format!("N = 4..8, max_support = 8: max error/bound {worst:.3}; a3/t0 = {a3:.6} vs gap {gap:.6} ({:.2}%)", 100.0 * rel),
        artifact_of(&run),
    )
}

fn criterion5() -> Outcome {
    let mut failures = vec![];
    let mut coefficients = vec![];
    for n in 1..=5usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        for mask in 0u32..1 << pairs.len() {
            let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|&e| mask >> e & 1 == 1).map(|e| pairs[e]).collect();
            if !connected(n, &edges) {
                continue;
            }
            let ours = ursell_coefficient(&Graph::from_edges(n, &edges)).unwrap();
            let brute = spanning_connected_sum(n, &edges);
            if ours != brute {
                failures.push(format!("n = {n}, {edges:?}: {ours} vs {brute}"));
            }
            coefficients.push(ours);
        }
    }
    if coefficients.len() != 772 {
        failures.push(format!("{} connected graphs enumerated, expected 772", coefficients.len()));
    }
    outcome(
        failures,
        format!("{} labelled connected graphs on ≤ 5 vertices match exactly", coefficients.len()),
        to_json(&coefficients).unwrap(),
    )
}

struct AkltRuns {
    verify: RunOutcome,
    split: RunOutcome,
    seconds: f64,
}

fn aklt_task(kind: TaskKind) -> RunOutcome {
    let spec = task_from_flags(kind, &Overrides { l: Some(2), n_blocks: Some(3), ..Default::default() }).unwrap();
    evaluate(&spec)
}

fn aklt_runs() -> &'static AkltRuns {
    static RUNS: OnceLock<AkltRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let verify = aklt_task(TaskKind::AkltVerify);
        let split = aklt_task(TaskKind::AkltSplit);
        AkltRuns { verify, split, seconds: start.elapsed().as_secs_f64() }
    })
}

fn verify_report() -> Result<&'static relbound_core::aklt::verify::AkltReport, String> {
    match &aklt_runs().verify.report {
        Some(TaskReport::AkltVerify(r)) => Ok(r),
        _ => Err(format!("aklt-verify failed: {:?}", aklt_runs().verify.failures)),
    }
}

fn criterion6() -> Outcome {
    let rep = match verify_report() {
        Ok(r) => r,
        Err(e) => return outcome(vec![e], String::new(), String::new()),
    };
    let mut failures = vec![];
    for k in &rep.kernels {
        if k.free != Some(4) {
            failures.push(format!("free kernel {:?} at n = {}", k.free, k.n));
        }
        if k.n >= 3 && k.periodic != Some(1) {
            failures.push(format!("periodic kernel {:?} at n = {}", k.periodic, k.n));
        }
    }
    let free_ns: Vec<usize> = rep.kernels.iter().map(|k| k.n).collect();
    if free_ns != (2..=8).collect::<Vec<_>>() {
        failures.push(format!("kernel rows {free_ns:?}"));
    }
    for n in 2..=6 {
        let count = |periodic| eigenvalues(&aklt_oracle(n, periodic)).iter().filter(|e| e.abs() < 1e-8).count();
        if count(false) != 4 || (n >= 3 && count(true) != 1) {
            failures.push(format!("independent kernel count differs at n = {n}"));
        }
    }
    for (name, v) in [
        ("frustration residual", rep.frustration_residual),
        ("periodic ground residual", rep.periodic_ground_residual),
        ("property-1 defect", rep.property1_defect),
    ] {
        if !(v <= AKLT_TOL) {
            failures.push(format!("{name} {v:.3e}"));
        }
    }
    let summary: serde_json::Value = serde_json::from_str(&aklt_runs().verify.summary_json).unwrap();
    for key in [
        "gamma_hat", "alpha_est", "beta_est", "hg_min_eig", "sg_min_eig", "commutator_norms", "gram_decay_rate",
        "gpp_decay_rate", "kernels", "split", "failures",
    ] {
        if summary["report"].get(key).is_none_or(|v| v.is_null()) {
            failures.push(format!("report field {key} missing"));
        }
    }
    outcome(
        failures,
        format!(
            "kernels free = 4 (n = 2..8), periodic = 1 (n = 3..8); residuals {:.1e}, {:.1e}; property-1 defect {:.1e}",
            rep.frustration_residual, rep.periodic_ground_residual, rep.property1_defect
        ),
        artifact_of(&aklt_runs().verify),
    )
}

fn criterion7() -> Outcome {
    let rep = match verify_report() {
        Ok(r) => r,
        Err(e) => return outcome(vec![e], String::new(), String::new()),
    };
    let mut failures = vec![];
    let ns: Vec<usize> = rep.gram.iter().map(|p| p.n).collect();
    if ns != (4..=9).collect::<Vec<_>>() {
        failures.push(format!("Gram sizes {ns:?}"));
    }
    let rate = rep.gram_decay_rate.unwrap_or(f64::NAN);
    let ln3 = 3f64.ln();
    if !((rate - ln3).abs() <= GRAM_RATE_REL_TOL * ln3) {
        failures.push(format!("rate {rate}"));
    }
    outcome(
        failures,
        format!("fitted rate {rate:.6} vs ln 3 = {ln3:.6} ({:.3}%)", 100.0 * (rate - ln3).abs() / ln3),
        format_float(rate),
    )
}

fn criterion8() -> Outcome {
    let rep = match verify_report() {
        Ok(r) => r,
        Err(e) => return outcome(vec![e], String::new(), String::new()),
    };
    let mut failures = vec![];
    let ls: Vec<usize> = rep.reduced_commutators.iter().map(|c| c.l).collect();
    if ls != vec![2, 4] {
        failures.push(format!("commutators computed for l = {ls:?}"));
    }
    let comm = rep
        .reduced_commutators
        .iter()
        .map(|c| c.norm)
        .chain(rep.commutator_norms.iter().copied())
        .fold(0.0, f64::max);
    if !(comm <= AKLT_TOL) {
        failures.push(format!("commutator {comm:.3e}"));
    }
    if rep.n_blocks != 3 {
        failures.push(format!("{} blocks", rep.n_blocks));
    }
    let hg = rep.hg_min_eig.iter().copied().fold(f64::INFINITY, f64::min);
    if !(hg >= -AKLT_TOL) {
        failures.push(format!("hg min eigenvalue {hg:.3e}"));
    }
    if !(rep.sg_min_eig >= -AKLT_TOL) {
        failures.push(format!("sg min eigenvalue {:.3e}", rep.sg_min_eig));
    }
    outcome(
        failures,
        format!("max commutator {comm:.2e} (l = 2, 4); hg min eig {hg:.2e}; sg min eig {:.2e}", rep.sg_min_eig),
        format!("{}{}", format_float(comm), format_float(hg)),
    )
}

fn criterion9() -> Outcome {
    let runs = aklt_runs();
    let rep = match &runs.split.report {
        Some(TaskReport::AkltSplit(r)) => r,
        _ => return outcome(vec![format!("aklt-split failed: {:?}", runs.split.failures)], String::new(), String::new()),
    };
    let s = &rep.split;
    let mut failures = vec![];
    if s.dim != 729 || s.l != 2 || s.n_blocks != 3 {
        failures.push(format!("chain l = {}, blocks = {}, dim = {}", s.l, s.n_blocks, s.dim));
    }
    if !(s.reconstruction_residual <= AKLT_TOL) {
        failures.push(format!("reconstruction residual {:.3e}", s.reconstruction_residual));
    }
    let phi_r_max = s.phi_r_max_eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(phi_r_max <= AKLT_TOL) {
        failures.push(format!("φ^(r) max eigenvalue {phi_r_max:.3e}"));
    }
    if !(s.alpha_est < 1.0) {
        failures.push(format!("alpha_est = {}", s.alpha_est));
    }
    let beta = |l| rep.beta_sweep.iter().find(|p| p.l == l).map(|p| p.beta).unwrap_or(f64::NAN);
    let (b2, b4) = (beta(2), beta(4));
    if !(b4 < b2) {
        failures.push(format!("beta {b2} -> {b4}"));
    }
    if runs.seconds >= AKLT_SECONDS {
        failures.push(format!("runtime {:.0} s", runs.seconds));
    }
    outcome(
        failures,
        format!(
            "dim 729: residual {:.1e}, max eig φ^(r) {phi_r_max:.1e}, alpha_est {:.6}, beta {b2:.4} (l = 2) -> {b4:.4} (l = 4); AKLT tasks {:.0} s",
            s.reconstruction_residual, s.alpha_est, runs.seconds
        ),
        artifact_of(&runs.split),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 9] = [
    ("semigroup decomposition identity", criterion1),
    ("factorization of disjoint configurations", criterion2),
    ("T' norm and weight bounds", criterion3),
    ("expansion against the exact ln Z", criterion4),
    ("Ursell coefficients by brute force", criterion5),
    ("AKLT ground-space structure", criterion6),
    ("Gram matrix decay", criterion7),
    ("commutativity and operator inequalities", criterion8),
    ("AKLT split", criterion9),
];

fn criterion10(first: &[String]) -> Outcome {
    let mut failures = vec![];
    for (k, (name, f)) in CRITERIA.iter().enumerate() {
        if matches!(k + 1, 6..=9) {
            continue;
        }
        if f().artifact != first[k] {
            failures.push(format!("criterion {} ({name}) differs", k + 1));
        }
    }
    let runs = aklt_runs();
    for (kind, previous) in [(TaskKind::AkltVerify, &runs.verify), (TaskKind::AkltSplit, &runs.split)] {
        if artifact_of(&aklt_task(kind)) != artifact_of(previous) {
            failures.push(format!("{kind} report differs"));
        }
    }
    outcome(failures, "criteria 1-9 rerun with the same seeds: reports byte-identical".into(), String::new())
}

fn main() -> ExitCode {
    let mut all_pass = true;
    let mut artifacts = vec![];
    let mut line = |k: usize, name: &str, o: &Outcome| {
        all_pass &= o.pass;
        println!("criterion {k:>2} [{name}]: {} — {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    for (k, (name, f)) in CRITERIA.iter().enumerate() {
        let o = f();
        line(k + 1, name, &o);
        artifacts.push(o.artifact);
    }
    let o = criterion10(&artifacts);
    line(10, "determinism", &o);
    if all_pass {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
