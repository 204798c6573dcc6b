//! Finite-dimensional comparison cases: the two-qubit operator square with
//! its exhaustive value-assignment refutation, and the single spin-1/2
//! noncontextual hidden-variable model with its empirical product-rule check.

use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::C64;
use crate::report::{ResidualRow, ResidualTable};

const SPIN_TOL: f64 = 1e-14;

/// Dense 4×4 complex matrix; entries of the operators here are exact
/// 0, ±1, ±i, so products stay exact in double precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4 {
    pub m: [[C64; 4]; 4],
}

impl Mat4 {
    pub fn zeros() -> Self {
        Mat4 {
            m: [[C64::new(0.0, 0.0); 4]; 4],
        }
    }

    pub fn identity() -> Self {
        let mut out = Self::zeros();
        for i in 0..4 {
            out.m[i][i] = C64::new(1.0, 0.0);
        }
        out
    }

    pub fn kron2(a: [[C64; 2]; 2], b: [[C64; 2]; 2]) -> Self {
        let mut out = Self::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out.m[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &Mat4) -> Mat4 {
        let mut out = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..4 {
                    acc += self.m[i][k] * other.m[k][j];
                }
                out.m[i][j] = acc;
            }
        }
        out
    }

    pub fn add(&self, other: &Mat4) -> Mat4 {
        let mut out = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] = self.m[i][j] + other.m[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat4) -> Mat4 {
        let mut out = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] = self.m[i][j] - other.m[i][j];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn involution_defect(&self) -> f64 {
        self.mul(self).sub(&Self::identity()).max_abs()
    }
}

fn sigma_x() -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    [[z, one], [one, z]]
}

fn sigma_y() -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [[z, -i], [i, z]]
}

fn eye2() -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    [[one, z], [z, one]]
}

/// The four two-qubit observables Â₁ = σx⊗I, Â₂ = I⊗σx, B̂₁ = σy⊗I,
/// B̂₂ = I⊗σy.
#[derive(Debug, Clone)]
pub struct SpinOpSet {
    pub a1: Mat4,
    pub a2: Mat4,
    pub b1: Mat4,
    pub b2: Mat4,
}

impl SpinOpSet {
    pub fn standard() -> Self {
        SpinOpSet {
            a1: Mat4::kron2(sigma_x(), eye2()),
            a2: Mat4::kron2(eye2(), sigma_x()),
            b1: Mat4::kron2(sigma_y(), eye2()),
            b2: Mat4::kron2(eye2(), sigma_y()),
        }
    }
}

/// Max-entry residuals of the four cross commutators, both same-index
/// anticommutators, and the sign identity
/// Â₁B̂₂Â₂B̂₁ + Â₁Â₂B̂₁B̂₂ = 0.
pub fn mermin_relations_check() -> ResidualTable {
    let ops = SpinOpSet::standard();
    let comm = |x: &Mat4, y: &Mat4| x.mul(y).sub(&y.mul(x)).max_abs();
    let anti = |x: &Mat4, y: &Mat4| x.mul(y).add(&y.mul(x)).max_abs();

    let mut table = ResidualTable::new();
    table.push(ResidualRow::checked(
        "comm_a1_a2",
        comm(&ops.a1, &ops.a2),
        SPIN_TOL,
    ));
    table.push(ResidualRow::checked(
        "comm_a1_b2",
        comm(&ops.a1, &ops.b2),
        SPIN_TOL,
    ));
    table.push(ResidualRow::checked(
        "comm_b1_a2",
        comm(&ops.b1, &ops.a2),
        SPIN_TOL,
    ));
    table.push(ResidualRow::checked(
        "comm_b1_b2",
        comm(&ops.b1, &ops.b2),
        SPIN_TOL,
    ));
    table.push(ResidualRow::checked(
        "anti_a1_b1",
        anti(&ops.a1, &ops.b1),
        SPIN_TOL,
    ));
    table.push(ResidualRow::checked(
        "anti_a2_b2",
        anti(&ops.a2, &ops.b2),
        SPIN_TOL,
    ));
    // Â₁B̂₂Â₂B̂₁ = −Â₁Â₂B̂₁B̂₂
    let lhs = ops.a1.mul(&ops.b2).mul(&ops.a2).mul(&ops.b1);
    let rhs = ops.a1.mul(&ops.a2).mul(&ops.b1).mul(&ops.b2);
    table.push(ResidualRow::checked(
        "sign_identity",
        lhs.add(&rhs).max_abs(),
        SPIN_TOL,
    ));
    table
}

/// Candidate noncontextual values, each ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub v_a1: i8,
    pub v_a2: i8,
    pub v_b1: i8,
    pub v_b2: i8,
}

impl Assignment {
    pub fn all_sixteen() -> Vec<Assignment> {
        let mut out = Vec::with_capacity(16);
        for &v_a1 in &[1i8, -1] {
            for &v_a2 in &[1i8, -1] {
                for &v_b1 in &[1i8, -1] {
                    for &v_b2 in &[1i8, -1] {
                        out.push(Assignment {
                            v_a1,
                            v_a2,
                            v_b1,
                            v_b2,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Product-Rule derivation for one assignment: the value of the four-fold
/// product computed through the (Â₁Â₂)(B̂₁B̂₂) grouping and through the
/// (Â₁B̂₂)(Â₂B̂₁) grouping, and whether the operator sign identity can be
/// satisfied.
#[derive(Debug, Clone, Copy)]
pub struct AssignmentTrace {
    pub assignment: Assignment,
    /// v[Â₁Â₂B̂₁B̂₂] = v[Â₁]v[Â₂]·v[B̂₁]v[B̂₂]
    pub route_a: i8,
    /// v[Â₁B̂₂Â₂B̂₁] = v[Â₁]v[B̂₂]·v[Â₂]v[B̂₁]
    pub route_b: i8,
    /// the operator identity forces v[Â₁B̂₂Â₂B̂₁] = −v[Â₁Â₂B̂₁B̂₂]
    pub required_route_b: i8,
    pub consistent: bool,
}

impl AssignmentTrace {
    pub fn render(&self) -> String {
        let a = &self.assignment;
        format!(
            "v[A1]={:+} v[A2]={:+} v[B1]={:+} v[B2]={:+}: route(a) v[A1 A2 B1 B2] = {:+}, route(b) v[A1 B2 A2 B1] = {:+}, sign identity requires route(b) = {:+} -> {}",
            a.v_a1,
            a.v_a2,
            a.v_b1,
            a.v_b2,
            self.route_a,
            self.route_b,
            self.required_route_b,
            if self.consistent { "consistent" } else { "inconsistent" }
        )
    }
}

/// Exhaustive refutation record over all 16 assignments.
#[derive(Debug, Clone)]
pub struct AssignmentSearch {
    pub traces: Vec<AssignmentTrace>,
    pub consistent_count: usize,
}

impl AssignmentSearch {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for t in &self.traces {
            let _ = writeln!(out, "{}", t.render());
        }
        let _ = writeln!(
            out,
            "consistent assignments: {} of {}",
            self.consistent_count,
            self.traces.len()
        );
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n  \"traces\": [\n");
        for (i, t) in self.traces.iter().enumerate() {
            let a = &t.assignment;
            let _ = write!(
                out,
                "    {{\"v_a1\": {}, \"v_a2\": {}, \"v_b1\": {}, \"v_b2\": {}, \"route_a\": {}, \"route_b\": {}, \"required_route_b\": {}, \"consistent\": {}}}",
                a.v_a1, a.v_a2, a.v_b1, a.v_b2, t.route_a, t.route_b, t.required_route_b, t.consistent
            );
            out.push_str(if i + 1 < self.traces.len() { ",\n" } else { "\n" });
        }
        let _ = write!(
            out,
            "  ],\n  \"consistent_count\": {}\n}}\n",
            self.consistent_count
        );
        out
    }
}

/// Enumerate all 16 assignments, derive both Product-Rule routes for the
/// four-fold product, and apply the operator sign identity. No assignment
/// survives.
pub fn assignment_search() -> AssignmentSearch {
    let mut traces = Vec::with_capacity(16);
    let mut consistent_count = 0;
    for assignment in Assignment::all_sixteen() {
        let Assignment {
            v_a1,
            v_a2,
            v_b1,
            v_b2,
        } = assignment;
        let route_a = v_a1 * v_a2 * v_b1 * v_b2;
        let route_b = v_a1 * v_b2 * v_a2 * v_b1;
        let required_route_b = -route_a;
        let consistent = route_b == required_route_b;
        if consistent {
            consistent_count += 1;
        }
        traces.push(AssignmentTrace {
            assignment,
            route_a,
            route_b,
            required_route_b,
            consistent,
        });
    }
    AssignmentSearch {
        traces,
        consistent_count,
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn check_unit(v: [f64; 3], what: &str) -> Result<()> {
    if (norm3(v) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "{what} must be a unit vector, norm is {}",
            norm3(v)
        )));
    }
    Ok(())
}

/// Angle between two unit vectors.
pub fn angle_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    dot3(a, b).clamp(-1.0, 1.0).acos()
}

/// Uniformly random unit vector.
pub fn random_unit_vector(rng: &mut impl Rng) -> [f64; 3] {
    let z: f64 = rng.random::<f64>() * 2.0 - 1.0;
    let phi: f64 = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Deterministic noncontextual model for one spin-1/2 prepared along n̂:
/// the outcome of measuring along m̂ is sign(m̂·n̂/2 + λ) with the hidden
/// variable λ drawn uniformly from [−1/2, 1/2] per run (sign(0) → +1).
/// This reproduces the Born statistics P(+1) = cos²(θ/2) exactly.
#[derive(Debug, Clone, Copy)]
pub struct BellModel {
    direction: [f64; 3],
}

impl BellModel {
    pub fn new(direction: [f64; 3]) -> Result<Self> {
        check_unit(direction, "state direction")?;
        Ok(BellModel { direction })
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }

    /// Outcome for measurement direction m̂ given the hidden variable.
    pub fn outcome(&self, m_hat: [f64; 3], lambda: f64) -> i8 {
        if 0.5 * dot3(m_hat, self.direction) + lambda >= 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Draw λ and sample one outcome.
pub fn bell_sample(model: &BellModel, m_hat: [f64; 3], rng: &mut impl Rng) -> Result<i8> {
    check_unit(m_hat, "measurement direction")?;
    let lambda = rng.random::<f64>() - 0.5;
    Ok(model.outcome(m_hat, lambda))
}

/// Born probability of outcome +1 for measurement along m̂ on a state along
/// n̂: (1 + m̂·n̂)/2 = cos²(θ/2).
pub fn p_plus_quantum(n_hat: [f64; 3], m_hat: [f64; 3]) -> f64 {
    0.5 * (1.0 + dot3(n_hat, m_hat))
}

/// One row of the product-rule check.
#[derive(Debug, Clone, Copy)]
pub struct EpsProductRow {
    pub angle: f64,
    pub pass_rate: f64,
}

/// Empirical check that the noncontextual model tracks the product rule as
/// the pair angle shrinks: for each pair (â, b̂) the symmetrized product of
/// the two spin observables is the scalar (â·b̂)·I, so its value is â·b̂ with
/// certainty; both outcomes are evaluated from the same λ draw, and a sample
/// passes when |â·b̂ − v[σ·â]·v[σ·b̂]| < ε. Angles must decrease strictly.
pub fn bell_eps_product_check(
    n_hat: [f64; 3],
    directions: &[([f64; 3], [f64; 3])],
    epsilon: f64,
    samples: u64,
    seed: u64,
) -> Result<Vec<EpsProductRow>> {
    if directions.is_empty() {
        return Err(Error::InvalidParameter("empty direction sequence".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let model = BellModel::new(n_hat)?;
    let mut last_angle = f64::INFINITY;
    let mut rows = Vec::with_capacity(directions.len());
    for (i, (a_hat, b_hat)) in directions.iter().enumerate() {
        check_unit(*a_hat, "pair direction a")?;
        check_unit(*b_hat, "pair direction b")?;
        let angle = angle_between(*a_hat, *b_hat);
        if angle >= last_angle {
            return Err(Error::InvalidParameter(
                "pair angles must decrease strictly toward zero".into(),
            ));
        }
        last_angle = angle;
        let target = dot3(*a_hat, *b_hat);
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
        );
        let mut passes = 0u64;
        for _ in 0..samples {
            let lambda = rng.random::<f64>() - 0.5;
            let va = model.outcome(*a_hat, lambda);
            let vb = model.outcome(*b_hat, lambda);
            if (target - (va * vb) as f64).abs() < epsilon {
                passes += 1;
            }
        }
        rows.push(EpsProductRow {
            angle,
            pass_rate: passes as f64 / samples as f64,
        });
    }
    Ok(rows)
}
