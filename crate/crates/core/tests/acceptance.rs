//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Set `NS1D_THREADS` to bound the worker pool.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ns1d::diagnostics::{entropy_balance_residual, kanel_growth_check, kanel_psi, log_grid};
use ns1d::experiments::{
    build_initial_state, conservation_drift, decay_study, manufactured_convergence, thread_pool,
    ConvergenceConfig, InitialData, RunSetup, CONSERVATION_TOLERANCE,
};
use ns1d::identity::{
    default_identity_law, evaluate_identity, least_squares_slope, measure_order, IdentityId,
    MeasuredOrder, SmoothFieldSpec,
};
use ns1d::io::driver;
use ns1d::io::{Checkpoint, RunConfig};
use ns1d::{GasParams, Grid, RunOptions, Solver, State, StepControl, TransportLaw};

const BAND: (f64, f64) = (1.8, 2.2);
const LEVELS: [usize; 3] = [128, 256, 512];

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

type Check = fn() -> anyhow::Result<Verdict>;

fn in_band(p: f64) -> bool {
    (BAND.0..=BAND.1).contains(&p)
}

fn order(dx: &[f64], err: &[f64]) -> f64 {
    let lx: Vec<f64> = dx.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    least_squares_slope(&lx, &ly)
}

fn equilibrium_fixed_point() -> anyhow::Result<Verdict> {
    let grid: Grid<f64> = Grid::new(256, 10.0)?;
    let solver = Solver::new(grid, GasParams::default(), TransportLaw::kinetic(4.0, 1.0, 1.0)?, StepControl::default())?;
    let mut state = State::equilibrium(&grid);
    for _ in 0..10_000 {
        let dt = solver.stable_dt(&state)?;
        state = solver.step(&state, dt).map_err(|f| f.error)?;
    }
    let drift = state
        .v
        .iter()
        .chain(&state.theta)
        .map(|x| (x - 1.0).abs())
        .chain(state.u.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    Ok(Verdict::new(
        drift <= 1e-12,
        format!("sup drift {drift:e} after 10000 steps (t = {:.3})", state.t),
    ))
}

fn identity_oracle() -> anyhow::Result<Verdict> {
    let params = GasParams::default();
    let law = default_identity_law();
    let jobs: Vec<(IdentityId, u64)> = IdentityId::ALL
        .iter()
        .flat_map(|&id| [7u64, 42].map(|s| (id, s)))
        .collect();
    let reports = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|&(id, seed)| {
                measure_order(id, &SmoothFieldSpec::with_seed(seed), &LEVELS, &params, &law)
                    .map(|r| (seed, r))
            })
            .collect::<ns1d::Result<Vec<_>>>()
    })?;
    let mut worst = (f64::NAN, String::new());
    let mut bad = Vec::new();
    for (seed, r) in &reports {
        match r.order {
            MeasuredOrder::Order(p) => {
                if !in_band(p) {
                    bad.push(format!("{}@{seed}={p:.3}", r.id));
                }
                if worst.0.is_nan() || (p - 2.0).abs() > (worst.0 - 2.0).abs() {
                    worst = (p, format!("{}@{seed}", r.id));
                }
            }
            MeasuredOrder::Exact => bad.push(format!("{}@{seed}=exact", r.id)),
        }
    }
    let grid = Grid::new(128, 10.0)?;
    let eq = State::equilibrium(&grid);
    let mut nonzero = 0usize;
    for id in IdentityId::ALL {
        let res = evaluate_identity(id, &eq, &law, &params, &grid)?;
        nonzero += res.iter().filter(|&&x| x != 0.0).count();
    }
    Ok(Verdict::new(
        bad.is_empty() && nonzero == 0,
        format!(
            "{} refinement studies, furthest order {:.4} ({}), equilibrium nonzero residuals {nonzero}{}",
            reports.len(),
            worst.0,
            worst.1,
            if bad.is_empty() { String::new() } else { format!(", out of band: {}", bad.join(" ")) }
        ),
    ))
}

struct BumpRun {
    dx: f64,
    balance: f64,
    energy_drift: f64,
    mass_drift: f64,
    momentum_drift: f64,
    dissipation_ok: bool,
}

/// Sine bump, γ = 1.4, amplitude 0.1, t_end = 2 at each level.
fn bump_runs() -> anyhow::Result<Vec<BumpRun>> {
    let runs = thread_pool()?.install(|| {
        LEVELS
            .par_iter()
            .map(|&n| -> anyhow::Result<BumpRun> {
                let grid: Grid<f64> = Grid::new(n, 10.0)?;
                let params = GasParams::normalized(1.4)?;
                let law = TransportLaw::kinetic(4.0, 1.0, 1.0)?;
                let (state, _) = build_initial_state(&InitialData::sine_bump(0.1, 2.5), &grid, &params)?;
                let solver = Solver::new(grid, params, law, StepControl::default())?;
                let out = solver
                    .run(state, 2.0, RunOptions { record_every: 20, ..RunOptions::default() })
                    .map_err(|f| f.error)?;
                let r = &out.records;
                let e0 = r[0].total_energy;
                let energy_drift = r.iter().map(|x| (x.total_energy - e0).abs() / e0.abs()).fold(0.0, f64::max);
                let (mass_drift, momentum_drift) = conservation_drift(r);
                let dissipation_ok = r.iter().all(|x| x.dissipation_cum >= 0.0)
                    && r.windows(2).all(|w| w[1].dissipation_cum >= w[0].dissipation_cum);
                Ok(BumpRun {
                    dx: grid.dx(),
                    balance: entropy_balance_residual(r)?,
                    energy_drift,
                    mass_drift,
                    momentum_drift,
                    dissipation_ok,
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    Ok(runs)
}

fn entropy_balance() -> anyhow::Result<Verdict> {
    let runs = bump_runs()?;
    let dx: Vec<f64> = runs.iter().map(|r| r.dx).collect();
    let res: Vec<f64> = runs.iter().map(|r| r.balance).collect();
    let p = order(&dx, &res);
    let dis = runs.iter().all(|r| r.dissipation_ok);
    let decreasing = res.windows(2).all(|w| w[1] < w[0]);
    Ok(Verdict::new(
        p >= 1.8 && dis && decreasing,
        format!(
            "residuals {:.3e} {:.3e} {:.3e}, order {p:.4}, dissipation non-negative and non-decreasing: {dis}",
            res[0], res[1], res[2]
        ),
    ))
}

fn conservation() -> anyhow::Result<Verdict> {
    let runs = bump_runs()?;
    let mass = runs.iter().map(|r| r.mass_drift).fold(0.0, f64::max);
    let mom = runs.iter().map(|r| r.momentum_drift).fold(0.0, f64::max);
    let dx: Vec<f64> = runs.iter().map(|r| r.dx).collect();
    let en: Vec<f64> = runs.iter().map(|r| r.energy_drift).collect();
    let p = order(&dx, &en);
    Ok(Verdict::new(
        mass <= CONSERVATION_TOLERANCE && mom <= CONSERVATION_TOLERANCE && p >= 1.8,
        format!(
            "mass drift {mass:.2e}, momentum drift {mom:.2e}, energy drifts {:.3e} {:.3e} {:.3e} (order {p:.4})",
            en[0], en[1], en[2]
        ),
    ))
}

fn manufactured() -> anyhow::Result<Verdict> {
    let rep = manufactured_convergence(&ConvergenceConfig::default())?;
    let [pv, pu, pt] = rep.orders;
    Ok(Verdict::new(
        rep.orders.iter().all(|&p| in_band(p)),
        format!("orders v {pv:.4}, u {pu:.4}, theta {pt:.4} on n = {:?}", rep.levels),
    ))
}

fn kanel() -> anyhow::Result<Verdict> {
    let at_one = kanel_psi(1.0)?.abs();
    let rep = kanel_growth_check(&log_grid(1e-6, 1e6, 50))?;
    let inc = rep.strictly_increasing();
    let large = rep.large_ratio;
    let small = rep.small_ratio;
    Ok(Verdict::new(
        at_one <= 1e-12 && inc && (0.95..=1.0).contains(&large) && (0.85..=1.15).contains(&small),
        format!(
            "|Psi(1)| = {at_one:e}, strictly increasing: {inc}, large ratio {large:.5}, small ratio {small:.5}"
        ),
    ))
}

fn decay_probe() -> anyhow::Result<Verdict> {
    let setup = RunSetup {
        n: 512,
        half_width: 20.0,
        t_end: 50.0,
        r: 1.0,
        a: 1.0,
        law: TransportLaw::kinetic(4.0, 1.0, 1.0)?,
        ic: InitialData::entropy_bump(1.0, 4.0),
        control: StepControl::default(),
        record_every: 200,
    };
    let rep = decay_study(&setup, 1.05)?;
    let ic = rep.initial;
    let env = rep.envelope;
    let theta_ok = env.theta_min >= ic.theta_min && env.theta_max <= ic.theta_max;
    let v_window = (0.5, 2.0);
    let v_ok = env.v_min >= v_window.0 && env.v_max <= v_window.1;
    let ratio = rep.decay_ratio.unwrap_or(f64::NAN);
    Ok(Verdict::new(
        theta_ok && v_ok && ratio <= 0.5 && rep.tail_nonincreasing,
        format!(
            "{} steps; theta in [{:.5}, {:.5}] vs initial [{:.5}, {:.5}]; v in [{:.5}, {:.5}] vs [{}, {}]; decay ratio {ratio:.4}; tail non-increasing: {}",
            rep.steps,
            env.theta_min,
            env.theta_max,
            ic.theta_min,
            ic.theta_max,
            env.v_min,
            env.v_max,
            v_window.0,
            v_window.1,
            rep.tail_nonincreasing
        ),
    ))
}

fn spread(x: &[f64]) -> f64 {
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    (hi - lo) / hi
}

fn theta_scaling() -> anyhow::Result<Verdict> {
    let grid = Grid::new(512, 10.0)?;
    let gammas = [1.4, 1.1, 1.025];
    let mut constant = Vec::new();
    let mut literal = Vec::new();
    for g in gammas {
        let (_, rep) = build_initial_state(&InitialData::entropy_bump(0.1, 2.5), &grid, &GasParams::normalized(g)?)?;
        constant.push(rep.theta_norm_ratio);
        literal.push(rep.scaled_theta_norm);
    }
    let s = spread(&constant);
    Ok(Verdict::new(
        s < 0.25,
        format!(
            "|theta0-1|_3/(gamma-1) = {:.5} {:.5} {:.5} (spread {:.2}%); |theta0-1|_3/sqrt(gamma-1) = {:.5} {:.5} {:.5} (spread {:.2}%, shrinks like sqrt(gamma-1))",
            constant[0],
            constant[1],
            constant[2],
            100.0 * s,
            literal[0],
            literal[1],
            literal[2],
            100.0 * spread(&literal)
        ),
    ))
}

const ROUND_TRIP_CFG: &str = "\
[gas]
gamma = 1.1
[transport]
alpha = 4
[grid]
n = 128
L = 8
[ic]
family = entropy_bump
amplitude = 0.5
support = 2
[control]
t_end = 1.0
record_every = 25
";

fn config_in(dir: &Path) -> anyhow::Result<RunConfig> {
    let text = format!("{ROUND_TRIP_CFG}[output]\ndir = \"{}\"\n", dir.display());
    Ok(RunConfig::parse(&text)?)
}

fn round_trip() -> anyhow::Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let params = GasParams::<f64>::new(rng.gen_range(1.001..1.7), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0))?;
        for _ in 0..64 {
            let v = rng.gen_range(0.2..5.0);
            let theta = rng.gen_range(0.2..5.0);
            let s = params.entropy(v, theta)?;
            let back = params.temperature_from_entropy(v, s)?;
            worst = worst.max((back - theta).abs() / theta);
        }
    }

    let full = tempfile::tempdir()?;
    let cfg = config_in(full.path())?;
    let a = driver::run(&cfg, None)?;
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let bytes = std::fs::read(&a.checkpoint)?;
    let ckpt_exact = ckpt.to_bytes() == bytes && Checkpoint::from_bytes(&bytes)? == ckpt;

    let split = tempfile::tempdir()?;
    let cfg_split = config_in(split.path())?;
    let head = driver::run(&cfg_split, Some(0.5))?;
    let tail = driver::resume(&cfg_split, &head.checkpoint, None)?;
    let resume_exact = head.interrupted
        && std::fs::read(&a.series)? == std::fs::read(&tail.series)?
        && std::fs::read(&a.checkpoint)? == std::fs::read(&tail.checkpoint)?;
    Ok(Verdict::new(
        worst <= 1e-13 && ckpt_exact && resume_exact,
        format!(
            "entropy/temperature worst relative error {worst:.2e} over 6400 points; checkpoint bit-exact: {ckpt_exact}; resume from t = {} reproduces CSV: {resume_exact}",
            head.final_time
        ),
    ))
}

fn determinism() -> anyhow::Result<Verdict> {
    let mut series = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir()?;
        let s = driver::run(&config_in(dir.path())?, None)?;
        series.push(std::fs::read(&s.series)?);
    }
    let same = series[0] == series[1];
    Ok(Verdict::new(same, format!("two runs, {} bytes of CSV each, identical: {same}", series[0].len())))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("equilibrium fixed point", equilibrium_fixed_point),
        ("identity oracle", identity_oracle),
        ("entropy balance", entropy_balance),
        ("conservation", conservation),
        ("manufactured convergence", manufactured),
        ("Kanel functional", kanel),
        ("decay probe near gamma = 1", decay_probe),
        ("initial temperature scaling", theta_scaling),
        ("round-trip integrity", round_trip),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t0 = Instant::now();
        let v = check().unwrap_or_else(|e| Verdict::new(false, format!("error: {e:#}")));
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            t0.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
