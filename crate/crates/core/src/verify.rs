//! The acceptance suite as a library: every check returns a measured value,
//! the bound it is held to and a verdict.
//!
//! Checks whose error comes from the time discretization honor
//! [`VerifyOptions::quadrature_tol`]; the rest keep fixed bounds.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_6, LN_2};
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{self, ChannelKind, ChannelSpec, KrausSet};
use crate::cli::{run_experiment, Figure};
use crate::cxmat::{hermitian_eigen, inner, ComplexMatrix};
use crate::exprparse::{parse_str, ExprError};
use crate::firstlaw::{self, EnergeticsLedger, TimeGrid};
use crate::oracle::{self, OracleConfig};
use crate::qstate::{prepare_pure_state, DensityOperator, Hamiltonian, InitialStatePrep};

pub const CPTP_TOLERANCE: f64 = 1e-12;

pub const HEAT_TOL: f64 = 1e-5;
pub const SUM_TOL: f64 = 5e-6;
pub const CLOSURE_TOL: f64 = 5e-5;
pub const PEAK_TOL: f64 = 1e-4;
pub const SYMMETRY_TOL: f64 = 1e-8;
pub const EXACT_TOL: f64 = 1e-12;
pub const DELTA_U_TOL: f64 = 1e-9;
pub const ORDER_RANGE: (f64, f64) = (3.5, 4.5);

/// Q(8) for phase damping from the closed form, θ = π/6, E_e − E_g = 1.
pub const PD_HEAT_AT_8: f64 = 0.173_161_059_913_120_43;
/// Q(8) for phase flip from the closed form.
pub const PF_HEAT_AT_8: f64 = 1.258_195_858_051_371_4e-4;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VerifyOptions {
    /// Replaces the bound of every discretization-limited check.
    pub quadrature_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    Within(f64, f64),
}

impl Bound {
    fn admits(self, x: f64) -> bool {
        match self {
            Bound::AtMost(t) => x <= t,
            Bound::Within(lo, hi) => (lo..=hi).contains(&x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub criterion: u8,
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
    pub passed: bool,
    pub detail: Option<String>,
}

impl CheckResult {
    fn new(criterion: u8, name: impl Into<String>, measured: f64, bound: Bound) -> Self {
        Self {
            criterion,
            name: name.into(),
            measured,
            bound,
            passed: bound.admits(measured),
            detail: None,
        }
    }

    fn failed(criterion: u8, name: impl Into<String>, detail: String) -> Self {
        Self {
            criterion,
            name: name.into(),
            measured: f64::NAN,
            bound: Bound::AtMost(0.0),
            passed: false,
            detail: Some(detail),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{:>2}] {verdict} {}: measured {:.6e}", self.criterion, self.name, self.measured)?;
        match self.bound {
            Bound::AtMost(t) => write!(f, " (limit {t:.1e})")?,
            Bound::Within(lo, hi) => write!(f, " (range [{lo}, {hi}])")?,
        }
        if let Some(d) = &self.detail {
            write!(f, " {d}")?;
        }
        Ok(())
    }
}

struct Ctx {
    quad: Option<f64>,
}

impl Ctx {
    fn quad(&self, default: f64) -> Bound {
        Bound::AtMost(self.quad.unwrap_or(default))
    }
}

fn pi6_state() -> DensityOperator {
    prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0))
}

fn unit_h() -> Hamiltonian {
    Hamiltonian::two_level(0.0, 1.0)
}

fn builtins() -> [ChannelSpec; 4] {
    [
        ChannelSpec::phase_damping(1.0),
        ChannelSpec::phase_flip(1.0),
        ChannelSpec::bit_flip(1.0),
        ChannelSpec::bit_phase_flip(1.0),
    ]
}

/// Unitary taking σ_z to the Pauli operator a builtin channel applies.
pub fn basis_change(kind: &ChannelKind) -> ComplexMatrix {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let i = Complex64::new(0.0, FRAC_1_SQRT_2);
    match kind {
        ChannelKind::BitFlip => ComplexMatrix::from_rows(&[[s, s], [s, -s]]),
        ChannelKind::BitPhaseFlip => ComplexMatrix::from_rows(&[[s, s], [i, -i]]),
        _ => ComplexMatrix::identity(2),
    }
}

/// The θ-state and diag(E_g, E_e) rotated so that `kind` acts on them the way
/// phase flip acts on the unrotated pair.
pub fn rotated_setup(kind: &ChannelKind, theta: f64, e_g: f64, e_e: f64) -> (DensityOperator, Hamiltonian) {
    let u = basis_change(kind);
    let rho = prepare_pure_state(InitialStatePrep::new(theta, 0.0))
        .conjugated_by(&u)
        .expect("2x2 unitary");
    let h = u
        .mul(&ComplexMatrix::real_diagonal(&[e_g, e_e]))
        .and_then(|m| m.mul(&u.adjoint()))
        .and_then(|m| m.hermitian_part())
        .expect("2x2 unitary");
    (rho, Hamiltonian::constant(&h).expect("Hermitian by construction"))
}

fn ledger(spec: &ChannelSpec, rho: &DensityOperator, h: &Hamiltonian, grid: &TimeGrid) -> Result<EnergeticsLedger, String> {
    firstlaw::run(spec, rho, h, grid).map(|(_, l)| l).map_err(|e| e.to_string())
}

fn max_diff(a: &EnergeticsLedger, b: &EnergeticsLedger, f: impl Fn(&firstlaw::LedgerRow) -> f64) -> f64 {
    a.rows.iter().zip(&b.rows).map(|(x, y)| (f(x) - f(y)).abs()).fold(0.0, f64::max)
}

fn pd_heat_error(steps: usize) -> Result<f64, String> {
    let cfg = OracleConfig::pi_over_six(0.0, 1.0).map_err(|e| e.to_string())?;
    let grid = TimeGrid::new(8.0, steps).map_err(|e| e.to_string())?;
    let l = ledger(&ChannelSpec::phase_damping(1.0), &pi6_state(), &unit_h(), &grid)?;
    Ok(l.max_abs(|r| r.heat - oracle::pd_heat(r.tau, &cfg)))
}

fn phase_damping_checks(ctx: &Ctx) -> Result<Vec<CheckResult>, String> {
    let cfg = OracleConfig::pi_over_six(0.0, 1.0).map_err(|e| e.to_string())?;
    let l = ledger(&ChannelSpec::phase_damping(1.0), &pi6_state(), &unit_h(), &TimeGrid::default())?;
    Ok(vec![
        CheckResult::new(
            1,
            "phase damping: max |Q - closed form|",
            l.max_abs(|r| r.heat - oracle::pd_heat(r.tau, &cfg)),
            ctx.quad(HEAT_TOL),
        ),
        CheckResult::new(
            1,
            format!("phase damping: |Q(8) - {PD_HEAT_AT_8:.7}|"),
            (l.last().heat - PD_HEAT_AT_8).abs(),
            ctx.quad(HEAT_TOL),
        ),
        CheckResult::new(
            2,
            "phase damping: max |C - closed form|",
            l.max_abs(|r| r.coherence - oracle::pd_coherence(r.tau, &cfg)),
            ctx.quad(HEAT_TOL),
        ),
        CheckResult::new(2, "phase damping: max |Q + C|", l.max_abs(|r| r.heat + r.coherence), ctx.quad(SUM_TOL)),
    ])
}

fn closure_checks(ctx: &Ctx) -> Result<Vec<CheckResult>, String> {
    let grid = TimeGrid::default();
    let mut out = Vec::new();
    for spec in builtins() {
        let l = ledger(&spec, &pi6_state(), &unit_h(), &grid)?;
        out.push(CheckResult::new(
            3,
            format!("{}: max |dU - (W + Q + C)|", spec.name()),
            l.max_closure_residual(),
            ctx.quad(CLOSURE_TOL),
        ));
    }
    let h = Hamiltonian::parse_diagonal(&["0", "1+0.1*t"]).map_err(|e| e.to_string())?;
    let l = ledger(&ChannelSpec::identity(2), &pi6_state(), &h, &grid)?;
    out.push(CheckResult::new(
        3,
        "driven diag(0, 1+0.1t), identity channel: max |dU - (W + Q + C)|",
        l.max_closure_residual(),
        ctx.quad(CLOSURE_TOL),
    ));
    out.push(CheckResult::new(
        3,
        "driven: max |Q|, |C|",
        l.max_abs(|r| r.heat).max(l.max_abs(|r| r.coherence)),
        Bound::AtMost(EXACT_TOL),
    ));
    out.push(CheckResult::new(
        3,
        "driven: max |dU - W|",
        l.max_abs(|r| r.delta_u - r.work),
        Bound::AtMost(EXACT_TOL),
    ));
    Ok(out)
}

fn invariant_checks() -> Result<Vec<CheckResult>, String> {
    let grid = TimeGrid::default();
    let mut out = Vec::new();
    let mut push = |label: String, l: &EnergeticsLedger| {
        out.push(CheckResult::new(4, format!("{label}: max |dU|"), l.max_abs(|r| r.delta_u), Bound::AtMost(DELTA_U_TOL)));
        out.push(CheckResult::new(4, format!("{label}: max |W|"), l.max_abs(|r| r.work), Bound::AtMost(EXACT_TOL)));
    };
    for spec in builtins() {
        let (rho, h) = rotated_setup(&spec.kind, FRAC_PI_6, 0.0, 1.0);
        let l = ledger(&spec, &rho, &h, &grid)?;
        push(format!("{} (theta=pi/6, matched basis)", spec.name()), &l);
    }
    for spec in [ChannelSpec::bit_flip(1.0), ChannelSpec::bit_phase_flip(1.0)] {
        let rho = prepare_pure_state(InitialStatePrep::new(FRAC_PI_4, 0.0));
        let l = ledger(&spec, &rho, &unit_h(), &grid)?;
        push(format!("{} (theta=pi/4, z basis)", spec.name()), &l);
    }
    Ok(out)
}

fn phase_flip_checks(ctx: &Ctx) -> Result<Vec<CheckResult>, String> {
    let grid = TimeGrid::default();
    let unit = OracleConfig::pi_over_six(0.0, 1.0).map_err(|e| e.to_string())?;
    let general = OracleConfig::pi_over_six(0.3, 1.7).map_err(|e| e.to_string())?;
    let l = ledger(&ChannelSpec::phase_flip(1.0), &pi6_state(), &unit_h(), &grid)?;
    let lg = ledger(&ChannelSpec::phase_flip(1.0), &pi6_state(), &Hamiltonian::two_level(0.3, 1.7), &grid)?;

    let mut heat_err: f64 = 0.0;
    let mut coh_err: f64 = 0.0;
    let mut gen_err: f64 = 0.0;
    let mut oracle_scale: f64 = 0.0;
    for (r, rg) in l.rows.iter().zip(&lg.rows) {
        let q = oracle::pf_heat(r.tau, &unit).map_err(|e| e.to_string())?;
        let c = oracle::pf_coherence(r.tau, &unit).map_err(|e| e.to_string())?;
        let qg = oracle::pf_heat(r.tau, &general).map_err(|e| e.to_string())?;
        let cg = oracle::pf_coherence(r.tau, &general).map_err(|e| e.to_string())?;
        heat_err = heat_err.max((r.heat - q).abs());
        coh_err = coh_err.max((r.coherence - c).abs());
        gen_err = gen_err.max((rg.heat - qg).abs()).max((rg.coherence - cg).abs());
        oracle_scale = oracle_scale.max((qg - 1.4 * q).abs()).max((cg - 1.4 * c).abs());
    }
    let numeric_scale = lg
        .rows
        .iter()
        .zip(&l.rows)
        .map(|(g, u)| (g.heat - 1.4 * u.heat).abs().max((g.coherence - 1.4 * u.coherence).abs()))
        .fold(0.0, f64::max);

    let i_peak = grid.nearest(LN_2);
    let argmax = l
        .rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.heat.total_cmp(&b.1.heat))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(vec![
        CheckResult::new(5, "phase flip: max |Q - closed form|", heat_err, ctx.quad(HEAT_TOL)),
        CheckResult::new(5, "phase flip: max |C - closed form|", coh_err, ctx.quad(HEAT_TOL)),
        CheckResult::new(
            5,
            format!("phase flip: |Q(tau={:.3}) - ln4/8|", grid.point(i_peak)),
            (l.rows[i_peak].heat - 4f64.ln() / 8.0).abs(),
            ctx.quad(PEAK_TOL),
        ),
        CheckResult::new(
            5,
            "phase flip: |argmax Q - ln 2| in tau",
            (grid.point(argmax) - LN_2).abs(),
            Bound::AtMost(grid.step()),
        ),
        CheckResult::new(
            5,
            format!("phase flip: |Q(8) - {PF_HEAT_AT_8:.4e}|"),
            (l.last().heat - PF_HEAT_AT_8).abs(),
            ctx.quad(HEAT_TOL),
        ),
        CheckResult::new(
            5,
            "phase flip (E_g, E_e) = (0.3, 1.7): max |Q, C - general closed form|",
            gen_err,
            ctx.quad(HEAT_TOL),
        ),
        CheckResult::new(5, "general closed form = 1.4 x unit closed form", oracle_scale, Bound::AtMost(1e-10)),
        CheckResult::new(5, "numeric (0.3, 1.7) = 1.4 x numeric (0, 1)", numeric_scale, Bound::AtMost(1e-10)),
    ])
}

fn order_checks() -> Result<Vec<CheckResult>, String> {
    let coarse = pd_heat_error(500)?;
    let fine = pd_heat_error(1000)?;
    let mut c = CheckResult::new(
        6,
        "heat error ratio, 500 -> 1000 steps",
        coarse / fine,
        Bound::Within(ORDER_RANGE.0, ORDER_RANGE.1),
    );
    c.detail = Some(format!("(errors {coarse:.3e}, {fine:.3e})"));
    Ok(vec![c])
}

fn symmetry_checks() -> Result<Vec<CheckResult>, String> {
    let grid = TimeGrid::default();
    let reference = ledger(&ChannelSpec::phase_flip(1.0), &pi6_state(), &unit_h(), &grid)?;
    let mut out = Vec::new();
    for spec in [ChannelSpec::bit_flip(1.0), ChannelSpec::bit_phase_flip(1.0)] {
        let (rho, h) = rotated_setup(&spec.kind, FRAC_PI_6, 0.0, 1.0);
        let l = ledger(&spec, &rho, &h, &grid)?;
        out.push(CheckResult::new(
            7,
            format!("{} vs phase flip: max |dQ|, |dC|", spec.name()),
            max_diff(&l, &reference, |r| r.heat).max(max_diff(&l, &reference, |r| r.coherence)),
            Bound::AtMost(SYMMETRY_TOL),
        ));
    }

    // (|g> + |e>)/sqrt 2 with sigma_x-diagonal energies is the rotated image of |g>
    let z_ground = prepare_pure_state(InitialStatePrep::new(0.0, 0.0));
    let z_ref = ledger(&ChannelSpec::phase_flip(1.0), &z_ground, &unit_h(), &grid)?;
    let (plus, hx) = rotated_setup(&ChannelKind::BitFlip, 0.0, 0.0, 1.0);
    let plus_direct = prepare_pure_state(InitialStatePrep::new(FRAC_PI_4, 0.0));
    let prep_dev = plus.matrix().sub(plus_direct.matrix()).map_err(|e| e.to_string())?.max_abs();
    let l = ledger(&ChannelSpec::bit_flip(1.0), &plus_direct, &hx, &grid)?;
    out.push(CheckResult::new(
        7,
        "bit flip on (|g>+|e>)/sqrt2, sigma_x energies vs phase flip on |g>: max |dQ|, |dC|",
        max_diff(&l, &z_ref, |r| r.heat).max(max_diff(&l, &z_ref, |r| r.coherence)).max(prep_dev),
        Bound::AtMost(SYMMETRY_TOL),
    ));

    let rho = prepare_pure_state(InitialStatePrep::new(FRAC_PI_4, 0.0));
    let l = ledger(&ChannelSpec::bit_flip(1.0), &rho, &unit_h(), &grid)?;
    out.push(CheckResult::new(
        7,
        "bit flip, theta=pi/4, z basis: max |dU - (W + Q + C)|",
        l.max_closure_residual(),
        Bound::AtMost(CLOSURE_TOL),
    ));
    Ok(out)
}

fn cptp_checks() -> Result<Vec<CheckResult>, String> {
    let mut worst: f64 = 0.0;
    for spec in builtins() {
        for i in 0..50 {
            let t = 8.0 * i as f64 / 49.0;
            let set = channel::kraus_at(&spec, t).map_err(|e| e.to_string())?;
            let report = channel::validate_cptp(&set, CPTP_TOLERANCE);
            worst = worst.max(report.checks.iter().map(|c| c.deviation).fold(0.0, f64::max));
        }
    }
    let double = KrausSet::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)], 0.0);
    let report = channel::validate_cptp(&double, CPTP_TOLERANCE);
    let dev = report.check("cptp").map_or(f64::NAN, |c| c.deviation);
    let mut counter = CheckResult::new(
        8,
        "{I, I} rejected with deviation 1: |deviation - 1|",
        (dev - 1.0).abs(),
        Bound::AtMost(0.0),
    );
    counter.passed &= !report.passed();
    Ok(vec![
        CheckResult::new(8, "builtins at 50 times: max |sum K^H K - I|", worst, Bound::AtMost(CPTP_TOLERANCE)),
        counter,
    ])
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in (i + 1)..n {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

fn eigensolver_checks() -> Result<Vec<CheckResult>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut residual, mut ortho): (f64, f64) = (0.0, 0.0);
    for k in 0..200 {
        let a = random_hermitian(&mut rng, 1 + k % 8);
        let e = hermitian_eigen(&a, 1e-12).map_err(|e| e.to_string())?;
        residual = residual.max(e.max_residual(&a).map_err(|e| e.to_string())?);
        ortho = ortho.max(e.orthonormality_deviation());
    }
    let mut closed: f64 = 0.0;
    for _ in 0..200 {
        let a = random_hermitian(&mut rng, 2);
        let (p, d, b) = (a[(0, 0)].re, a[(1, 1)].re, a[(0, 1)]);
        let r = (((p - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
        let lambdas = [(p + d) / 2.0 - r, (p + d) / 2.0 + r];
        let e = hermitian_eigen(&a, 1e-12).map_err(|e| e.to_string())?;
        for (j, &lam) in lambdas.iter().enumerate() {
            closed = closed.max((e.eigenvalues[j] - lam).abs());
            let v = [Complex64::new(lam - d, 0.0), b.conj()];
            let norm = inner(&v, &v).re.sqrt();
            let fid = inner(&v, &e.vector(j)).norm_sqr() / (norm * norm);
            closed = closed.max((1.0 - fid).abs());
        }
    }
    Ok(vec![
        CheckResult::new(9, "200 random Hermitian (dim 1..8): max residual", residual, Bound::AtMost(1e-10)),
        CheckResult::new(9, "200 random Hermitian (dim 1..8): max orthonormality error", ortho, Bound::AtMost(1e-12)),
        CheckResult::new(9, "2x2 closed form: max eigenvalue / eigenvector error", closed, Bound::AtMost(1e-12)),
    ])
}

fn oracle_checks() -> Result<Vec<CheckResult>, String> {
    let rho0 = pi6_state();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let tau = 8.0 * i as f64 / 99.0;
        let exact = oracle::pd_eigensystem(tau, &rho0).map_err(|e| e.to_string())?;
        let m = oracle::pd_state(tau, &rho0).map_err(|e| e.to_string())?;
        let num = hermitian_eigen(&m, 1e-12).map_err(|e| e.to_string())?;
        // oracle index 0 is the larger eigenvalue, the solver sorts ascending
        for (j, jn) in [(0, 1), (1, 0)] {
            worst = worst.max((exact.eigenvalues[j] - num.eigenvalues[jn]).abs());
            let fid = inner(&exact.eigenvectors[j], &num.vector(jn)).norm_sqr();
            worst = worst.max((1.0 - fid).abs());
        }
    }
    Ok(vec![CheckResult::new(
        10,
        "phase damping eigensystem, closed form vs Jacobi at 100 tau",
        worst,
        Bound::AtMost(1e-12),
    )])
}

fn parser_checks() -> Result<Vec<CheckResult>, String> {
    let eval = |src: &str, t: f64| parse_str(src).and_then(|e| e.eval(t));
    let mut out = Vec::new();
    for (src, t, want) in [
        ("1+2*3", 0.0, 7.0),
        ("(1+2)*3", 0.0, 9.0),
        ("-2^2", 0.0, -4.0),
        ("1-exp(-t)", 0.0, 0.0),
        ("1-exp(-t)", LN_2, 0.5),
    ] {
        let got = eval(src, t).map_err(|e| format!("{src}: {e}"))?;
        out.push(CheckResult::new(11, format!("eval {src:?} at t={t:.6}"), (got - want).abs(), Bound::AtMost(1e-15)));
    }
    type Expect = fn(&ExprError) -> bool;
    let cases: [(&str, Expect); 3] = [
        ("foo(t)", |e| matches!(e, ExprError::Parse { .. })),
        ("(1+t", |e| matches!(e, ExprError::Parse { .. })),
        ("sqrt(-1-t)", |e| matches!(e, ExprError::Domain { .. })),
    ];
    for (src, expected) in cases {
        let ok = matches!(eval(src, 0.0), Err(ref e) if expected(e));
        out.push(CheckResult::new(
            11,
            format!("{src:?} is rejected with the right error"),
            if ok { 0.0 } else { 1.0 },
            Bound::AtMost(0.0),
        ));
    }
    Ok(out)
}

fn determinism_checks() -> Result<Vec<CheckResult>, String> {
    let a = run_experiment(&Figure::Fig2.config()).map_err(|e| e.to_string())?.csv.render();
    let b = run_experiment(&Figure::Fig2.config()).map_err(|e| e.to_string())?.csv.render();
    let differing = a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    Ok(vec![CheckResult::new(
        12,
        "fig2 CSV rendered twice: differing bytes",
        differing as f64,
        Bound::AtMost(0.0),
    )])
}

type Group = fn(&Ctx) -> Result<Vec<CheckResult>, String>;

const GROUPS: [(u8, &str, Group); 11] = [
    (1, "phase damping", phase_damping_checks),
    (3, "first-law closure", closure_checks),
    (4, "non-dissipative invariants", |_| invariant_checks()),
    (5, "phase flip", phase_flip_checks),
    (6, "quadrature order", |_| order_checks()),
    (7, "channel symmetry", |_| symmetry_checks()),
    (8, "CPTP", |_| cptp_checks()),
    (9, "eigensolver", |_| eigensolver_checks()),
    (10, "oracle cross-check", |_| oracle_checks()),
    (11, "parser", |_| parser_checks()),
    (12, "determinism", |_| determinism_checks()),
];

/// Runs every check group on its own thread and returns the results in
/// criterion order.
pub fn run_all(options: &VerifyOptions) -> Vec<CheckResult> {
    let ctx = Ctx {
        quad: options.quadrature_tol,
    };
    std::thread::scope(|scope| {
        let handles: Vec<_> = GROUPS
            .iter()
            .map(|&(id, label, group)| {
                let ctx = &ctx;
                (id, label, scope.spawn(move || group(ctx)))
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|(id, label, h)| match h.join() {
                Ok(Ok(results)) => results,
                Ok(Err(msg)) => vec![CheckResult::failed(id, label, msg)],
                Err(_) => vec![CheckResult::failed(id, label, "check panicked".into())],
            })
            .collect()
    })
}
