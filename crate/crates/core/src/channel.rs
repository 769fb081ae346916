//! Kraus channels: the four builtin non-dissipative qubit channels plus
//! expression-defined custom channels.
//!
//! All builtins are parameterized cumulatively from t = 0, mapping ρ(0)
//! directly to ρ(t); short-time maps are never composed. With
//! γ = p = 1 − e^{−Γt}:
//!
//! | channel          | K₁              | K₂              |
//! |------------------|-----------------|-----------------|
//! | phase damping    | diag(1, √(1−γ)) | diag(0, √γ)     |
//! | phase flip       | √(1−p)·I        | √p·σ_z          |
//! | bit flip         | √(1−p)·I        | √p·σ_x          |
//! | bit-phase flip   | √(1−p)·I        | √p·σ_y          |

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::cxmat::{ComplexMatrix, MatrixError};
use crate::exprparse::{self, ExprError, Expression};
use crate::qstate::DensityOperator;
use crate::validation::ValidationReport;

/// `apply` refuses Kraus sets whose completeness deviation exceeds this.
pub const APPLY_CPTP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("channel time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("channel rate must be positive and finite, got {0}")]
    BadRate(f64),
    #[error("Kraus operator {operator}, entry ({row}, {col}) {part} part at t={time}: {source}")]
    Expression {
        operator: usize,
        row: usize,
        col: usize,
        part: &'static str,
        time: f64,
        #[source]
        source: ExprError,
    },
    #[error("Kraus set at t={time} is not trace preserving: max |sum K^H K - I| = {deviation:e}")]
    NotCptp { time: f64, deviation: f64 },
    #[error("dimension mismatch: channel acts on {channel}, state has {state}")]
    DimensionMismatch { channel: usize, state: usize },
    #[error("invalid custom channel: {0}")]
    Schema(String),
    #[error("unknown channel {0:?}")]
    UnknownChannel(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub operators: Vec<ComplexMatrix>,
    pub time_label: f64,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>, time_label: f64) -> Self {
        Self {
            operators,
            time_label,
        }
    }

    pub fn dim(&self) -> usize {
        self.operators.first().map(|k| k.rows()).unwrap_or(0)
    }
}

/// Matrix of `[re, im]` expression pairs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionMatrix {
    pub dim: usize,
    pub entries: Vec<(Expression, Expression)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CustomChannel {
    pub dim: usize,
    pub operators: Vec<ExpressionMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelKind {
    PhaseDamping,
    PhaseFlip,
    BitFlip,
    BitPhaseFlip,
    Custom(CustomChannel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    /// Γ, inverse time. Dimensionless time is τ = Γt.
    pub rate: f64,
}

impl ChannelSpec {
    pub fn new(kind: ChannelKind, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(ChannelError::BadRate(rate));
        }
        Ok(Self { kind, rate })
    }

    pub fn phase_damping(rate: f64) -> Self {
        Self::new(ChannelKind::PhaseDamping, rate).expect("positive rate")
    }

    pub fn phase_flip(rate: f64) -> Self {
        Self::new(ChannelKind::PhaseFlip, rate).expect("positive rate")
    }

    pub fn bit_flip(rate: f64) -> Self {
        Self::new(ChannelKind::BitFlip, rate).expect("positive rate")
    }

    pub fn bit_phase_flip(rate: f64) -> Self {
        Self::new(ChannelKind::BitPhaseFlip, rate).expect("positive rate")
    }

    pub fn custom(channel: CustomChannel, rate: f64) -> Result<Self> {
        Self::new(ChannelKind::Custom(channel), rate)
    }

    /// The do-nothing channel {I} as a custom channel.
    pub fn identity(dim: usize) -> Self {
        let entries = (0..dim * dim)
            .map(|idx| {
                let re = if idx / dim == idx % dim { 1.0 } else { 0.0 };
                (Expression::Number(re), Expression::Number(0.0))
            })
            .collect();
        Self::custom(
            CustomChannel {
                dim,
                operators: vec![ExpressionMatrix { dim, entries }],
            },
            1.0,
        )
        .expect("unit rate")
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ChannelKind::Custom(c) => c.dim,
            _ => 2,
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.kind, ChannelKind::Custom(_))
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ChannelKind::PhaseDamping => "phase-damping",
            ChannelKind::PhaseFlip => "phase-flip",
            ChannelKind::BitFlip => "bit-flip",
            ChannelKind::BitPhaseFlip => "bit-phase-flip",
            ChannelKind::Custom(_) => "custom",
        }
    }
}

impl FromStr for ChannelKind {
    type Err = ChannelError;

    /// Builtin names in either kebab or snake case.
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "phase-damping" => Ok(ChannelKind::PhaseDamping),
            "phase-flip" => Ok(ChannelKind::PhaseFlip),
            "bit-flip" => Ok(ChannelKind::BitFlip),
            "bit-phase-flip" => Ok(ChannelKind::BitPhaseFlip),
            _ => Err(ChannelError::UnknownChannel(s.to_string())),
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (rate {})", self.name(), self.rate)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Text(String),
    Number(f64),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCustom {
    kind: String,
    dim: usize,
    kraus: Vec<Vec<Vec<[RawEntry; 2]>>>,
    #[serde(default)]
    rate: Option<f64>,
}

impl CustomChannel {
    /// Parses `{"kind":"custom","dim":d,"kraus":[matrix, ...]}` where each
    /// matrix is a list of rows and each entry a `[re, im]` pair of expression
    /// strings (plain numbers are accepted too). Returns the channel and the
    /// optional `"rate"` field.
    pub fn from_json(text: &str) -> Result<(Self, Option<f64>)> {
        let raw: RawCustom = serde_json::from_str(text).map_err(|e| ChannelError::Schema(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<(Self, Option<f64>)> {
        let raw: RawCustom = serde_json::from_value(value).map_err(|e| ChannelError::Schema(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawCustom) -> Result<(Self, Option<f64>)> {
        if raw.kind != "custom" {
            return Err(ChannelError::Schema(format!("kind must be \"custom\", got {:?}", raw.kind)));
        }
        let dim = raw.dim;
        if dim == 0 {
            return Err(ChannelError::Schema("dim must be positive".into()));
        }
        if raw.kraus.is_empty() {
            return Err(ChannelError::Schema("at least one Kraus operator is required".into()));
        }
        let mut operators = Vec::with_capacity(raw.kraus.len());
        for (k, rows) in raw.kraus.into_iter().enumerate() {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(ChannelError::Schema(format!("Kraus operator {k} is not {dim}x{dim}")));
            }
            let mut entries = Vec::with_capacity(dim * dim);
            for (i, row) in rows.into_iter().enumerate() {
                for (j, [re, im]) in row.into_iter().enumerate() {
                    let parse = |raw: RawEntry, part: &str| match raw {
                        RawEntry::Number(x) => Ok(Expression::Number(x)),
                        RawEntry::Text(s) => exprparse::parse_str(&s).map_err(|e| {
                            ChannelError::Schema(format!("operator {k} entry ({i}, {j}) {part}: {e}"))
                        }),
                    };
                    entries.push((parse(re, "real")?, parse(im, "imaginary")?));
                }
            }
            operators.push(ExpressionMatrix { dim, entries });
        }
        Ok((Self { dim, operators }, raw.rate))
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Instantiates the Kraus operators at physical time `t`.
pub fn kraus_at(spec: &ChannelSpec, t: f64) -> Result<KrausSet> {
    if t < 0.0 || t.is_nan() {
        return Err(ChannelError::NegativeTime(t));
    }
    // 1 − e^{−Γt} without cancellation near t = 0
    let p = -(-spec.rate * t).exp_m1();
    let keep = real((1.0 - p).sqrt());
    let flip = real(p.sqrt());
    let operators = match &spec.kind {
        ChannelKind::PhaseDamping => vec![
            ComplexMatrix::real_diagonal(&[1.0, (1.0 - p).sqrt()]),
            ComplexMatrix::real_diagonal(&[0.0, p.sqrt()]),
        ],
        ChannelKind::PhaseFlip => vec![
            ComplexMatrix::identity(2).scale(keep),
            ComplexMatrix::pauli_z().scale(flip),
        ],
        ChannelKind::BitFlip => vec![
            ComplexMatrix::identity(2).scale(keep),
            ComplexMatrix::pauli_x().scale(flip),
        ],
        ChannelKind::BitPhaseFlip => vec![
            ComplexMatrix::identity(2).scale(keep),
            ComplexMatrix::pauli_y().scale(flip),
        ],
        ChannelKind::Custom(custom) => custom
            .operators
            .iter()
            .enumerate()
            .map(|(k, op)| eval_matrix(k, op, t))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(KrausSet::new(operators, t))
}

fn eval_matrix(operator: usize, m: &ExpressionMatrix, t: f64) -> Result<ComplexMatrix> {
    let d = m.dim;
    let mut data = Vec::with_capacity(d * d);
    for (idx, (re, im)) in m.entries.iter().enumerate() {
        let wrap = |part| {
            move |source| ChannelError::Expression {
                operator,
                row: idx / d,
                col: idx % d,
                part,
                time: t,
                source,
            }
        };
        data.push(Complex64::new(
            re.eval(t).map_err(wrap("real"))?,
            im.eval(t).map_err(wrap("imaginary"))?,
        ));
    }
    Ok(ComplexMatrix::from_vec(d, d, data)?)
}

/// Reports ‖Σ K†K − I‖_max against `tol`.
pub fn validate_cptp(set: &KrausSet, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new();
    let d = set.dim();
    let shapes_ok = !set.operators.is_empty() && set.operators.iter().all(|k| k.rows() == d && k.cols() == d);
    if !shapes_ok {
        report.push("shape", f64::INFINITY, 0.0);
        return report;
    }
    let mut sum = ComplexMatrix::zeros(d, d);
    for k in &set.operators {
        sum = sum
            .add(&k.adjoint().mul(k).expect("square"))
            .expect("same shape");
    }
    let deviation = sum.sub(&ComplexMatrix::identity(d)).expect("same shape").max_abs();
    report.push("cptp", deviation, tol);
    report
}

/// ρ ↦ Σ K ρ K†. Refuses sets that are not trace preserving within 1e-10.
pub fn apply(set: &KrausSet, rho: &DensityOperator) -> Result<DensityOperator> {
    if set.dim() != rho.dim() {
        return Err(ChannelError::DimensionMismatch {
            channel: set.dim(),
            state: rho.dim(),
        });
    }
    let report = validate_cptp(set, APPLY_CPTP_TOLERANCE);
    if !report.passed() {
        let deviation = report.checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
        return Err(ChannelError::NotCptp {
            time: set.time_label,
            deviation,
        });
    }
    let d = rho.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for k in &set.operators {
        out = out.add(&k.mul(rho.matrix())?.mul(&k.adjoint())?)?;
    }
    Ok(DensityOperator::from_matrix(out.hermitian_part()?).expect("square by construction"))
}

/// ρ(t) = ε_t[ρ(0)].
pub fn evolve(spec: &ChannelSpec, rho0: &DensityOperator, t: f64) -> Result<DensityOperator> {
    apply(&kraus_at(spec, t)?, rho0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{prepare_pure_state, validate_density, InitialStatePrep};
    use std::f64::consts::{FRAC_PI_6, LN_2};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.sub(b).unwrap().max_abs() <= tol
    }

    fn builtins() -> Vec<ChannelSpec> {
        vec![
            ChannelSpec::phase_damping(1.0),
            ChannelSpec::phase_flip(1.0),
            ChannelSpec::bit_flip(1.0),
            ChannelSpec::bit_phase_flip(1.0),
        ]
    }

    #[test]
    fn phase_damping_at_zero_is_identity_and_zero() {
        let set = kraus_at(&ChannelSpec::phase_damping(1.0), 0.0).unwrap();
        assert_eq!(set.operators[0], ComplexMatrix::identity(2));
        assert_eq!(set.operators[1], ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn phase_damping_at_ln4() {
        let set = kraus_at(&ChannelSpec::phase_damping(1.0), 4f64.ln()).unwrap();
        assert!(close(&set.operators[0], &ComplexMatrix::real_diagonal(&[1.0, 0.5]), 1e-15));
        assert!(close(
            &set.operators[1],
            &ComplexMatrix::real_diagonal(&[0.0, 3f64.sqrt() / 2.0]),
            1e-15
        ));
        // rate scales time
        let fast = kraus_at(&ChannelSpec::phase_damping(2.0), 4f64.ln() / 2.0).unwrap();
        assert!(close(&fast.operators[0], &set.operators[0], 1e-15));
    }

    #[test]
    fn phase_flip_at_ln2() {
        let set = kraus_at(&ChannelSpec::phase_flip(1.0), LN_2).unwrap();
        let h = real(0.5f64.sqrt());
        assert!(close(&set.operators[0], &ComplexMatrix::identity(2).scale(h), 1e-15));
        assert!(close(&set.operators[1], &ComplexMatrix::pauli_z().scale(h), 1e-15));
    }

    #[test]
    fn cptp_examples() {
        for spec in builtins() {
            for i in 0..50 {
                let set = kraus_at(&spec, i as f64 * 0.2).unwrap();
                let report = validate_cptp(&set, 1e-12);
                assert!(report.passed(), "{spec} at {i}: {report}");
            }
        }
        let bad = KrausSet::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)], 0.0);
        let report = validate_cptp(&bad, 1e-12);
        assert!(!report.passed());
        assert_eq!(report.check("cptp").unwrap().deviation, 1.0);
        let rho = DensityOperator::maximally_mixed(2);
        assert!(matches!(apply(&bad, &rho), Err(ChannelError::NotCptp { .. })));
    }

    #[test]
    fn closed_form_off_diagonal_scaling() {
        let rho0 = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
        let s3 = 3f64.sqrt() / 4.0;
        for i in 0..=40 {
            let tau = i as f64 * 0.2;
            let pd = evolve(&ChannelSpec::phase_damping(1.0), &rho0, tau).unwrap();
            let pf = evolve(&ChannelSpec::phase_flip(1.0), &rho0, tau).unwrap();
            let pd_expected = ComplexMatrix::from_real_rows(&[
                [0.75, s3 * (-tau / 2.0).exp()],
                [s3 * (-tau / 2.0).exp(), 0.25],
            ]);
            let f = 2.0 * (-tau).exp() - 1.0;
            let pf_expected = ComplexMatrix::from_real_rows(&[[0.75, s3 * f], [s3 * f, 0.25]]);
            assert!(close(pd.matrix(), &pd_expected, 1e-12));
            assert!(close(pf.matrix(), &pf_expected, 1e-12));
        }
    }

    #[test]
    fn evolve_examples() {
        let rho0 = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
        let pd = evolve(&ChannelSpec::phase_damping(1.0), &rho0, 2.0).unwrap();
        assert!((pd.matrix()[(0, 1)].re - 0.159_296_470_792_246).abs() < 1e-12);

        let pf = evolve(&ChannelSpec::phase_flip(1.0), &rho0, LN_2).unwrap();
        assert!(close(pf.matrix(), &ComplexMatrix::real_diagonal(&[0.75, 0.25]), 1e-15));

        for spec in builtins() {
            assert_eq!(evolve(&spec, &rho0, 0.0).unwrap(), rho0);
        }
        assert!(matches!(
            evolve(&ChannelSpec::phase_flip(1.0), &rho0, -1.0),
            Err(ChannelError::NegativeTime(_))
        ));
    }

    #[test]
    fn phase_flip_factor_changes_sign() {
        let rho0 = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.0));
        let at = |tau: f64| evolve(&ChannelSpec::phase_flip(1.0), &rho0, tau).unwrap().matrix()[(0, 1)].re;
        assert!(at(0.5) > 0.0);
        assert!(at(1.0) < 0.0);
        let expected = 3f64.sqrt() / 4.0 * (2.0 * (-1.0f64).exp() - 1.0);
        assert!((at(1.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn unital_builtins_fix_maximally_mixed_state() {
        let mixed = DensityOperator::maximally_mixed(2);
        for spec in builtins() {
            for i in 0..20 {
                let out = evolve(&spec, &mixed, i as f64 * 0.4).unwrap();
                assert!(close(out.matrix(), mixed.matrix(), 1e-15), "{spec}");
            }
        }
    }

    #[test]
    fn builtins_preserve_density_invariants() {
        for spec in builtins() {
            for (theta, phi) in [(FRAC_PI_6, 0.0), (0.9, 2.1), (0.3, 4.0)] {
                let rho0 = prepare_pure_state(InitialStatePrep::new(theta, phi));
                for i in 0..100 {
                    let tau = 8.0 * i as f64 / 99.0;
                    let rho = evolve(&spec, &rho0, tau).unwrap();
                    let report = validate_density(&rho, 1e-12);
                    assert!(report.check("hermitian").unwrap().passed);
                    assert!(report.check("trace").unwrap().passed);
                    assert!(report.check("psd").unwrap().deviation <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn bit_phase_flip_uses_complex_sigma_y() {
        // |+⟩⟨+| under σ_y becomes |−⟩⟨−|; halfway (p=1/2) the coherence vanishes
        let plus = DensityOperator::new(ComplexMatrix::from_real_rows(&[[0.5, 0.5], [0.5, 0.5]])).unwrap();
        let out = evolve(&ChannelSpec::bit_phase_flip(1.0), &plus, LN_2).unwrap();
        assert!(close(out.matrix(), DensityOperator::maximally_mixed(2).matrix(), 1e-15));
        // a σ_y eigenstate is a fixed point
        let r = 0.5;
        let plus_i = ComplexMatrix::from_rows(&[
            [real(r), Complex64::new(0.0, -r)],
            [Complex64::new(0.0, r), real(r)],
        ]);
        let plus_i = DensityOperator::new(plus_i).unwrap();
        let out = evolve(&ChannelSpec::bit_phase_flip(1.0), &plus_i, 1.3).unwrap();
        assert!(close(out.matrix(), plus_i.matrix(), 1e-15));
    }

    #[test]
    fn custom_channel_from_json() {
        let json = r#"{"kind":"custom","dim":2,"kraus":[
            [[["1","0"],["0","0"]],[["0","0"],["exp(-t/2)","0"]]],
            [[["0","0"],["0","0"]],[["0","0"],["sqrt(1-exp(-t))","0"]]]
        ]}"#;
        let (custom, rate) = CustomChannel::from_json(json).unwrap();
        assert_eq!(rate, None);
        let spec = ChannelSpec::custom(custom, 1.0).unwrap();
        let builtin = ChannelSpec::phase_damping(1.0);
        let rho0 = prepare_pure_state(InitialStatePrep::new(FRAC_PI_6, 0.7));
        for i in 0..20 {
            let t = i as f64 * 0.3;
            let a = evolve(&spec, &rho0, t).unwrap();
            let b = evolve(&builtin, &rho0, t).unwrap();
            assert!(close(a.matrix(), b.matrix(), 1e-15));
        }
    }

    #[test]
    fn custom_channel_schema_errors() {
        let wrong_kind = r#"{"kind":"phase_flip","dim":2,"kraus":[[[["1","0"],["0","0"]],[["0","0"],["1","0"]]]]}"#;
        assert!(matches!(CustomChannel::from_json(wrong_kind), Err(ChannelError::Schema(_))));
        let ragged = r#"{"kind":"custom","dim":2,"kraus":[[[["1","0"]],[["0","0"],["1","0"]]]]}"#;
        assert!(matches!(CustomChannel::from_json(ragged), Err(ChannelError::Schema(_))));
        let bad_expr = r#"{"kind":"custom","dim":1,"kraus":[[[["foo(t)","0"]]]]}"#;
        assert!(matches!(CustomChannel::from_json(bad_expr), Err(ChannelError::Schema(_))));
    }

    #[test]
    fn custom_channel_domain_error_carries_context() {
        let json = r#"{"kind":"custom","dim":1,"kraus":[[[["sqrt(1-t)",0]]]]}"#;
        let (custom, _) = CustomChannel::from_json(json).unwrap();
        let spec = ChannelSpec::custom(custom, 1.0).unwrap();
        match kraus_at(&spec, 2.0) {
            Err(ChannelError::Expression { operator: 0, row: 0, col: 0, part: "real", time, .. }) => {
                assert_eq!(time, 2.0)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identity_channel_and_names() {
        let rho0 = prepare_pure_state(InitialStatePrep::new(0.4, 0.2));
        assert_eq!(evolve(&ChannelSpec::identity(2), &rho0, 3.0).unwrap(), rho0);
        assert_eq!("phase_flip".parse::<ChannelKind>().unwrap(), ChannelKind::PhaseFlip);
        assert_eq!("bit-phase-flip".parse::<ChannelKind>().unwrap(), ChannelKind::BitPhaseFlip);
        assert!("amplitude-damping".parse::<ChannelKind>().is_err());
        assert!(ChannelSpec::new(ChannelKind::BitFlip, 0.0).is_err());
    }
}
