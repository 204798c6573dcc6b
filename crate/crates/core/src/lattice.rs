//! Discretized single-degree-of-freedom Hilbert space on a periodic box.
//!
//! Position samples live on the half-offset grid q_j = -L/2 + (j + 1/2)·dx,
//! momenta on the dual grid p_k = 2πk/L for k = -N/2 … N/2-1, with ħ = 1
//! throughout. The half offset keeps cosine sign boundaries off the grid for
//! commensurate parameter families; the momentum convention makes translation
//! by an integer number of sites an exact circular permutation.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Norm tolerance for state and ensemble invariants.
pub const NORM_TOL: f64 = 1e-12;

/// Which representation a state's amplitude array is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Position,
    Momentum,
}

/// Direction argument for [`transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToMomentum,
    ToPosition,
}

/// Periodic position grid of N sites over a box of length L and its momentum
/// dual. Immutable after construction; shared via `Arc`.
pub struct LatticeConfig {
    n: usize,
    length: f64,
    dx: f64,
    q: Vec<f64>,
    p: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    // e^{iπk(1 - 1/N)} for k = i - N/2: half-offset and box-centering phases
    // that turn the plain DFT into the q_j ↔ p_k transform.
    phase: Vec<C64>,
}

impl fmt::Debug for LatticeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeConfig")
            .field("n", &self.n)
            .field("length", &self.length)
            .field("dx", &self.dx)
            .finish()
    }
}

/// Build the lattice. N must be even and at least 8; L must be positive.
pub fn make_lattice(n: usize, length: f64) -> Result<Arc<LatticeConfig>> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "grid size must be an even integer >= 8, got {n}"
        )));
    }
    if !length.is_finite() || length <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "box length must be positive and finite, got {length}"
        )));
    }
    let nf = n as f64;
    let dx = length / nf;
    let q: Vec<f64> = (0..n)
        .map(|j| -0.5 * length + (j as f64 + 0.5) * dx)
        .collect();
    let half = (n / 2) as i64;
    let p: Vec<f64> = (0..n)
        .map(|i| 2.0 * std::f64::consts::PI * (i as i64 - half) as f64 / length)
        .collect();
    let phase: Vec<C64> = (0..n)
        .map(|i| {
            let k = (i as i64 - half) as f64;
            C64::from_polar(1.0, std::f64::consts::PI * k * (1.0 - 1.0 / nf))
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    Ok(Arc::new(LatticeConfig {
        n,
        length,
        dx,
        q,
        p,
        fwd,
        inv,
        phase,
    }))
}

impl LatticeConfig {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn q_samples(&self) -> &[f64] {
        &self.q
    }

    pub fn p_samples(&self) -> &[f64] {
        &self.p
    }

    /// Two configs describe the same Hilbert space.
    pub fn same_grid(&self, other: &LatticeConfig) -> bool {
        self.n == other.n && self.length == other.length
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    /// Unitary map position → momentum amplitudes (k-order matching
    /// `p_samples`): out_k = N^{-1/2} Σ_j e^{-i p_k q_j} in_j.
    pub fn to_momentum(&self, pos: &[C64]) -> Result<Vec<C64>> {
        self.check_len(pos.len())?;
        let n = self.n;
        let mut buf = pos.to_vec();
        self.fwd.process(&mut buf);
        let scale = 1.0 / (n as f64).sqrt();
        let out = (0..n)
            .map(|i| {
                let src = (i + n / 2) % n;
                self.phase[i] * buf[src] * scale
            })
            .collect();
        Ok(out)
    }

    /// Inverse of [`Self::to_momentum`].
    pub fn to_position(&self, mom: &[C64]) -> Result<Vec<C64>> {
        self.check_len(mom.len())?;
        let n = self.n;
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let dst = (i + n / 2) % n;
            buf[dst] = self.phase[i].conj() * mom[i];
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / (n as f64).sqrt();
        for v in buf.iter_mut() {
            *v *= scale;
        }
        Ok(buf)
    }
}

/// Normalized state vector tagged with the basis its amplitudes refer to.
#[derive(Debug, Clone)]
pub struct PureState {
    cfg: Arc<LatticeConfig>,
    basis: Basis,
    amps: Vec<C64>,
}

impl PureState {
    /// Wrap amplitudes already normalized to 1 (within [`NORM_TOL`]),
    /// interpreted in the position basis.
    pub fn from_amplitudes(cfg: Arc<LatticeConfig>, amps: Vec<C64>) -> Result<Self> {
        cfg.check_len(amps.len())?;
        let nrm = l2_norm(&amps);
        if (nrm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "state norm {nrm} deviates from 1 by more than {NORM_TOL:e}"
            )));
        }
        Ok(PureState {
            cfg,
            basis: Basis::Position,
            amps,
        })
    }

    /// Normalize an arbitrary nonzero vector into a position-basis state.
    pub fn from_unnormalized(cfg: Arc<LatticeConfig>, mut amps: Vec<C64>) -> Result<Self> {
        cfg.check_len(amps.len())?;
        let nrm = l2_norm(&amps);
        if nrm < 1e-300 {
            return Err(Error::InvalidParameter(
                "cannot normalize the zero vector".into(),
            ));
        }
        for a in amps.iter_mut() {
            *a /= nrm;
        }
        Ok(PureState {
            cfg,
            basis: Basis::Position,
            amps,
        })
    }

    pub fn config(&self) -> &Arc<LatticeConfig> {
        &self.cfg
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amps)
    }

    /// ⟨self|other⟩ with the physics convention (conjugate-linear on the left).
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if !self.cfg.same_grid(&other.cfg) || self.basis != other.basis {
            return Err(Error::InvalidParameter(
                "inner product requires matching lattice and basis".into(),
            ));
        }
        Ok(inner(&self.amps, &other.amps))
    }
}

/// Euclidean norm of a complex vector.
pub fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean distance between complex vectors (panics on length mismatch).
pub fn l2_dist(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// ⟨a|b⟩ = Σ conj(a_i)·b_i.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Unitary basis change; errors if the state is already in the target basis.
pub fn transform(state: &PureState, direction: Direction) -> Result<PureState> {
    let (target, amps) = match (direction, state.basis) {
        (Direction::ToMomentum, Basis::Position) => {
            (Basis::Momentum, state.cfg.to_momentum(&state.amps)?)
        }
        (Direction::ToPosition, Basis::Momentum) => {
            (Basis::Position, state.cfg.to_position(&state.amps)?)
        }
        _ => {
            return Err(Error::InvalidParameter(
                "state is already in the requested basis".into(),
            ))
        }
    };
    Ok(PureState {
        cfg: Arc::clone(&state.cfg),
        basis: target,
        amps,
    })
}

/// Normalized discrete Gaussian ∝ exp(-(q-x0)²/(4σ²) + i·p0·q).
///
/// σ must be resolved by the grid (σ ≥ 3 dx) and contained in the box
/// (σ ≤ L/6, center at least 3σ from either wall).
pub fn gaussian_state(
    cfg: &Arc<LatticeConfig>,
    x0: f64,
    p0: f64,
    sigma: f64,
) -> Result<PureState> {
    let l = cfg.length();
    if !(sigma.is_finite() && x0.is_finite() && p0.is_finite()) {
        return Err(Error::InvalidParameter("non-finite Gaussian parameter".into()));
    }
    if sigma < 3.0 * cfg.dx() {
        return Err(Error::InvalidParameter(format!(
            "sigma = {sigma} unresolved: requires sigma >= 3*dx = {}",
            3.0 * cfg.dx()
        )));
    }
    if sigma > l / 6.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma = {sigma} too wide: requires sigma <= L/6 = {}",
            l / 6.0
        )));
    }
    let lo = -0.5 * l + 3.0 * sigma;
    let hi = 0.5 * l - 3.0 * sigma;
    if x0 < lo || x0 > hi {
        return Err(Error::InvalidParameter(format!(
            "x0 = {x0} clipped by the box: requires {lo} <= x0 <= {hi}"
        )));
    }
    let amps: Vec<C64> = cfg
        .q_samples()
        .iter()
        .map(|&q| {
            let d = q - x0;
            let env = (-d * d / (4.0 * sigma * sigma)).exp();
            C64::from_polar(env, p0 * q)
        })
        .collect();
    PureState::from_unnormalized(Arc::clone(cfg), amps)
}

/// Weighted mixture of pure states standing in for a density operator.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    /// Weights must be nonnegative and sum to 1 within [`NORM_TOL`]; all
    /// members must share a lattice and the position basis.
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("ensemble has no members".into()));
        }
        let cfg = members[0].1.config().clone();
        let mut total = 0.0;
        for (w, s) in &members {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidParameter(format!("invalid weight {w}")));
            }
            if !s.config().same_grid(&cfg) {
                return Err(Error::DimensionMismatch {
                    expected: cfg.n(),
                    got: s.config().n(),
                });
            }
            if s.basis() != Basis::Position {
                return Err(Error::InvalidParameter(
                    "ensemble members must be position-basis states".into(),
                ));
            }
            total += w;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "ensemble weights sum to {total}, not 1"
            )));
        }
        Ok(Ensemble { members })
    }

    pub fn pure(state: PureState) -> Self {
        Ensemble {
            members: vec![(1.0, state)],
        }
    }

    pub fn uniform(states: Vec<PureState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidParameter("ensemble has no members".into()));
        }
        let w = 1.0 / states.len() as f64;
        // Kahan-free: equal weights w*m differ from 1 by at most one ulp,
        // within NORM_TOL for any member count used here.
        Ensemble::new(states.into_iter().map(|s| (w, s)).collect())
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn config(&self) -> &Arc<LatticeConfig> {
        self.members[0].1.config()
    }

    pub(crate) fn from_parts_renormalized(mut members: Vec<(f64, PureState)>) -> Result<Self> {
        let total: f64 = members.iter().map(|(w, _)| *w).sum();
        if members.is_empty() || total < 1e-300 {
            return Err(Error::InvalidParameter(
                "projected ensemble has no remaining weight".into(),
            ));
        }
        for (w, _) in members.iter_mut() {
            *w /= total;
        }
        Ensemble::new(members)
    }
}

/// Gaussian parameters in box-relative units: x0 and sigma as fractions of L,
/// p0 in momentum quanta 2π/L. The same spec instantiates physically matched
/// states on lattices of different size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

impl GaussianSpec {
    pub fn instantiate(&self, cfg: &Arc<LatticeConfig>) -> Result<PureState> {
        let l = cfg.length();
        gaussian_state(
            cfg,
            self.x0 * l,
            self.p0 * 2.0 * std::f64::consts::PI / l,
            self.sigma * l,
        )
    }
}

/// Lattice-independent description of a test state.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Gaussian(GaussianSpec),
    /// Real-coefficient superposition of Gaussians, normalized after summing.
    Superposition(Vec<(f64, GaussianSpec)>),
}

impl StateSpec {
    pub fn gaussian(x0: f64, p0: f64, sigma: f64) -> Self {
        StateSpec::Gaussian(GaussianSpec { x0, p0, sigma })
    }

    pub fn instantiate(&self, cfg: &Arc<LatticeConfig>) -> Result<PureState> {
        match self {
            StateSpec::Gaussian(g) => g.instantiate(cfg),
            StateSpec::Superposition(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidParameter(
                        "empty superposition spec".into(),
                    ));
                }
                let mut acc = vec![C64::new(0.0, 0.0); cfg.n()];
                for (coef, g) in parts {
                    let s = g.instantiate(cfg)?;
                    for (a, b) in acc.iter_mut().zip(s.amplitudes()) {
                        *a += coef * b;
                    }
                }
                PureState::from_unnormalized(Arc::clone(cfg), acc)
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            StateSpec::Gaussian(g) => format!("g_x{}_p{}_s{}", g.x0, g.p0, g.sigma),
            StateSpec::Superposition(parts) => {
                let inner: Vec<String> = parts
                    .iter()
                    .map(|(c, g)| format!("{}*g_x{}_p{}_s{}", c, g.x0, g.p0, g.sigma))
                    .collect();
                format!("sup({})", inner.join("+"))
            }
        }
    }

    /// The default five-state Gaussian family used by sweeps and audits.
    ///
    /// The zeros of cos(b₁p) sit at odd multiples of n momentum quanta, so
    /// momentum centers are even multiples of 64: for n in {4, 8, 16, 32}
    /// they stay at least 4 quanta (several momentum widths) away from the
    /// zero band, keeping the value-zero exclusion probability negligible.
    pub fn standard_family() -> Vec<StateSpec> {
        vec![
            StateSpec::gaussian(0.0, 0.0, 1.0 / 12.0),
            StateSpec::gaussian(0.125, 0.0, 1.0 / 12.0),
            StateSpec::gaussian(-0.1, 64.0, 0.1),
            StateSpec::gaussian(0.05, -64.0, 0.125),
            StateSpec::gaussian(0.0, 128.0, 1.0 / 12.0),
        ]
    }

    pub fn instantiate_family(
        specs: &[StateSpec],
        cfg: &Arc<LatticeConfig>,
    ) -> Result<Vec<PureState>> {
        specs.iter().map(|s| s.instantiate(cfg)).collect()
    }
}
