//! Model Hamiltonians, their number-conserving block structure, and unitary evolution.
//!
//! Hamiltonians are assembled term by term on basis states, so nothing larger than one
//! conserved-charge block is ever stored densely. Evolution diagonalizes each block once
//! and then costs one matrix-vector product per block per time.

pub mod bec;
pub mod nmr;
pub mod revival;
pub mod sweep;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeSpace, PureState, MAX_DENSITY_ENTRIES};

pub use bec::bec_analytic_state;
pub use nmr::nmr_rho_t;
pub use revival::{revival_time, RevivalClock};
pub use sweep::{spectrum_sweep, SweepParam, SweepPoint};

/// One of the model Hamiltonians (ħ = 1, rates in rad per unit time).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum HamiltonianSpec {
    /// χ₁ a†²a² + χ₂ a†³a³ on one mode.
    KerrCubic { chi1: f64, chi2: f64 },
    /// ω₀N + ω₁(a†a − b†b) + UN² − λ(a†b + ab†), modes [a, b].
    Bec { omega0: f64, omega1: f64, u: f64, lambda: f64 },
    /// ω_F a†a + ω_A b†b + γ b†²b² + g(a†b + ab†), modes [field a, atom b].
    AtomField { omega_f: f64, omega_a: f64, gamma: f64, g: f64 },
    /// Field with Kerr term coupled to a chain of qubits; subsystems [field, q1..qM].
    TavisCummings { omega_f: f64, chi: f64, omegas: Vec<f64>, lambda: f64, lambda_s: f64 },
    /// Two fields and two atoms, subsystems [A, B, C, D]; C couples to A, D to B.
    Djc { chi_f: f64, chi0: f64, g0: f64 },
    /// Two fields and four atoms, subsystems [A, B, C1, C2, D1, D2].
    Dtc { chi_f: f64, chi0: f64, g0: f64 },
    /// 4χ_s(σ_Ax + σ_Bx)σ_Mx on qubits [M, A, B].
    NmrSpin { chi_s: f64 },
}

impl HamiltonianSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            HamiltonianSpec::Bec { u, .. } if !(*u > 0.0) => {
                Err(Error::Parameter("BEC needs U > 0 for a spectrum bounded below".into()))
            }
            HamiltonianSpec::AtomField { gamma, .. } if !(*gamma > 0.0) => {
                Err(Error::Parameter("atom-field model needs gamma > 0".into()))
            }
            HamiltonianSpec::TavisCummings { omegas, .. } if omegas.is_empty() => {
                Err(Error::Parameter("Tavis-Cummings needs at least one qubit".into()))
            }
            _ => Ok(()),
        }
    }

    /// Layout of the state space this model acts on, given the Fock cutoff per field.
    pub fn space(&self, cutoff: usize) -> ModeSpace {
        let f = cutoff + 1;
        let dims = match self {
            HamiltonianSpec::KerrCubic { .. } => vec![f],
            HamiltonianSpec::Bec { .. } | HamiltonianSpec::AtomField { .. } => vec![f, f],
            HamiltonianSpec::TavisCummings { omegas, .. } => {
                std::iter::once(f).chain(std::iter::repeat(2).take(omegas.len())).collect()
            }
            HamiltonianSpec::Djc { .. } => vec![f, f, 2, 2],
            HamiltonianSpec::Dtc { .. } => vec![f, f, 2, 2, 2, 2],
            HamiltonianSpec::NmrSpin { .. } => vec![2, 2, 2],
        };
        ModeSpace::new(dims).expect("model layouts are valid")
    }

    fn check_space(&self, space: &ModeSpace) -> Result<()> {
        let want = self.space(space.cutoff(0).max(1));
        let ok = match self {
            HamiltonianSpec::NmrSpin { .. } => space.dims() == [2, 2, 2],
            HamiltonianSpec::Bec { .. } | HamiltonianSpec::AtomField { .. } => space.n_subsystems() == 2,
            _ => {
                space.n_subsystems() == want.n_subsystems()
                    && space.dims().iter().zip(want.dims()).all(|(a, b)| *b != 2 || *a == 2)
            }
        };
        if !ok {
            return Err(Error::Dimension(format!("space {:?} does not fit this model", space.dims())));
        }
        Ok(())
    }

    /// Conserved charges of a basis state; H never couples different charges.
    fn charge(&self, m: &[usize]) -> Vec<usize> {
        let exc = |q: usize| usize::from(q == crate::fock::qubit::EXCITED);
        match self {
            HamiltonianSpec::KerrCubic { .. } => vec![m[0]],
            HamiltonianSpec::Bec { .. } | HamiltonianSpec::AtomField { .. } => vec![m[0] + m[1]],
            HamiltonianSpec::TavisCummings { .. } => vec![m[0] + m[1..].iter().map(|&q| exc(q)).sum::<usize>()],
            HamiltonianSpec::Djc { .. } => vec![m[0] + exc(m[2]), m[1] + exc(m[3])],
            HamiltonianSpec::Dtc { .. } => vec![m[0] + exc(m[2]) + exc(m[3]), m[1] + exc(m[4]) + exc(m[5])],
            HamiltonianSpec::NmrSpin { .. } => vec![0],
        }
    }

    /// H|m> as a list of (target multi-index, amplitude); targets beyond a cutoff are dropped.
    fn apply(&self, space: &ModeSpace, m: &[usize]) -> Vec<(Vec<usize>, C64)> {
        let mut out = Terms { space, src: m, acc: Vec::new() };
        let n = |k: usize| m[k] as f64;
        match self {
            HamiltonianSpec::KerrCubic { chi1, chi2 } => {
                let x = n(0);
                out.diag(chi1 * x * (x - 1.0) + chi2 * x * (x - 1.0) * (x - 2.0));
            }
            HamiltonianSpec::Bec { omega0, omega1, u, lambda } => {
                let tot = n(0) + n(1);
                out.diag(omega0 * tot + omega1 * (n(0) - n(1)) + u * tot * tot);
                out.hop(0, 1, -lambda);
                out.hop(1, 0, -lambda);
            }
            HamiltonianSpec::AtomField { omega_f, omega_a, gamma, g } => {
                out.diag(omega_f * n(0) + omega_a * n(1) + gamma * n(1) * (n(1) - 1.0));
                out.hop(0, 1, *g);
                out.hop(1, 0, *g);
            }
            HamiltonianSpec::TavisCummings { omega_f, chi, omegas, lambda, lambda_s } => {
                let mut d = omega_f * n(0) + chi * n(0) * (n(0) - 1.0);
                for (p, om) in omegas.iter().enumerate() {
                    d += om * sz(m[1 + p]);
                    out.jc(0, 1 + p, *lambda);
                }
                out.diag(d);
                for p in 1..omegas.len() {
                    out.flip_flop(p, p + 1, *lambda_s);
                }
            }
            HamiltonianSpec::Djc { chi_f, chi0, g0 } => {
                out.diag(chi_f * (n(0) + n(1)) + chi0 * (sz(m[2]) + sz(m[3])));
                out.jc(0, 2, *g0);
                out.jc(1, 3, *g0);
            }
            HamiltonianSpec::Dtc { chi_f, chi0, g0 } => {
                out.diag(chi_f * (n(0) + n(1)) + chi0 * (2..6).map(|k| sz(m[k])).sum::<f64>());
                out.jc(0, 2, *g0);
                out.jc(0, 3, *g0);
                out.jc(1, 4, *g0);
                out.jc(1, 5, *g0);
            }
            HamiltonianSpec::NmrSpin { chi_s } => {
                // 4χ (½X_A)(½X_M) flips both spins with amplitude χ
                out.flip2(0, 1, *chi_s);
                out.flip2(0, 2, *chi_s);
            }
        }
        out.acc
    }
}

fn sz(q: usize) -> f64 {
    if q == crate::fock::qubit::EXCITED {
        0.5
    } else {
        -0.5
    }
}

struct Terms<'a> {
    space: &'a ModeSpace,
    src: &'a [usize],
    acc: Vec<(Vec<usize>, C64)>,
}

impl Terms<'_> {
    fn diag(&mut self, e: f64) {
        self.acc.push((self.src.to_vec(), C64::new(e, 0.0)));
    }

    /// c · a_up† a_down
    fn hop(&mut self, up: usize, down: usize, c: f64) {
        let (nu, nd) = (self.src[up], self.src[down]);
        if nd == 0 || nu + 1 >= self.space.dims()[up] {
            return;
        }
        let mut t = self.src.to_vec();
        t[up] += 1;
        t[down] -= 1;
        self.acc.push((t, C64::new(c * ((nu + 1) as f64 * nd as f64).sqrt(), 0.0)));
    }

    /// c (a† σ⁻ + a σ⁺) between field `f` and qubit `q`.
    fn jc(&mut self, f: usize, q: usize, c: f64) {
        use crate::fock::qubit::{EXCITED, GROUND};
        let n = self.src[f];
        let mut t = self.src.to_vec();
        if self.src[q] == EXCITED && n + 1 < self.space.dims()[f] {
            t[f] = n + 1;
            t[q] = GROUND;
            self.acc.push((t, C64::new(c * ((n + 1) as f64).sqrt(), 0.0)));
        } else if self.src[q] == GROUND && n > 0 {
            t[f] = n - 1;
            t[q] = EXCITED;
            self.acc.push((t, C64::new(c * (n as f64).sqrt(), 0.0)));
        }
    }

    /// c (σ_p⁻ σ_r⁺ + σ_r⁻ σ_p⁺): swaps an excitation between qubits p and r.
    fn flip_flop(&mut self, p: usize, r: usize, c: f64) {
        if self.src[p] != self.src[r] {
            let mut t = self.src.to_vec();
            t.swap(p, r);
            self.acc.push((t, C64::new(c, 0.0)));
        }
    }

    /// c X_p X_r with Pauli X (both spins flipped).
    fn flip2(&mut self, p: usize, r: usize, c: f64) {
        let mut t = self.src.to_vec();
        t[p] ^= 1;
        t[r] ^= 1;
        self.acc.push((t, C64::new(c, 0.0)));
    }
}

/// Dense Hamiltonian on the full space.
pub fn build_hamiltonian(spec: &HamiltonianSpec, space: &ModeSpace) -> Result<DMatrix<C64>> {
    spec.validate()?;
    spec.check_space(space)?;
    let n = space.total_dim();
    if n.saturating_mul(n) > MAX_DENSITY_ENTRIES {
        return Err(Error::Dimension(format!("dense Hamiltonian of dimension {n} is too large; use sectors")));
    }
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        for (t, c) in spec.apply(space, &space.multi_index(j)) {
            h[(space.flat_index(&t), j)] += c;
        }
    }
    Ok(h)
}

/// Eigen-decomposition of one conserved-charge block.
#[derive(Clone, Debug)]
pub struct SectorEigen {
    pub charge: Vec<usize>,
    /// Flat indices of the block's basis states in the full space.
    pub indices: Vec<usize>,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Columns are eigenvectors in the block basis.
    pub vectors: DMatrix<C64>,
    /// False when some state of the block coupled past the cutoff (block truncated).
    pub complete: bool,
}

impl SectorEigen {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Eigenvector k embedded in the full space.
    pub fn state(&self, k: usize, space: &ModeSpace) -> PureState {
        let mut amps = DVector::zeros(space.total_dim());
        for (r, &i) in self.indices.iter().enumerate() {
            amps[i] = self.vectors[(r, k)];
        }
        PureState { space: space.clone(), amps }
    }
}

/// Block Hamiltonians grouped by conserved charge.
pub fn sector_hamiltonians(spec: &HamiltonianSpec, space: &ModeSpace) -> Result<Vec<(Vec<usize>, Vec<usize>, DMatrix<C64>, bool)>> {
    spec.validate()?;
    spec.check_space(space)?;
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for i in 0..space.total_dim() {
        groups.entry(spec.charge(&space.multi_index(i))).or_default().push(i);
    }
    let mut out = Vec::with_capacity(groups.len());
    for (charge, indices) in groups {
        let pos: BTreeMap<usize, usize> = indices.iter().enumerate().map(|(r, &i)| (i, r)).collect();
        let d = indices.len();
        let mut h = DMatrix::zeros(d, d);
        let mut complete = true;
        for (c, &i) in indices.iter().enumerate() {
            let m = space.multi_index(i);
            let terms = spec.apply(space, &m);
            for (t, amp) in terms {
                let r = pos[&space.flat_index(&t)];
                h[(r, c)] += amp;
            }
            // a hop that would have left the space marks the block as truncated
            if m.iter().zip(space.dims()).any(|(&k, &dim)| dim > 2 && k + 1 == dim) {
                complete = false;
            }
        }
        out.push((charge, indices, h, complete));
    }
    Ok(out)
}

/// Diagonalize a Hermitian matrix; eigenvalues ascending with matching columns.
pub fn eigh(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (energies, vectors)
}

/// All block eigensystems of a model on a given space, reusable across times.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub space: ModeSpace,
    pub sectors: Vec<SectorEigen>,
}

impl Propagator {
    pub fn new(spec: &HamiltonianSpec, space: &ModeSpace) -> Result<Self> {
        let sectors = sector_hamiltonians(spec, space)?
            .into_iter()
            .map(|(charge, indices, h, complete)| {
                let (energies, vectors) = eigh(&h);
                SectorEigen { charge, indices, energies, vectors, complete }
            })
            .collect();
        Ok(Self { space: space.clone(), sectors })
    }

    pub fn sector(&self, charge: &[usize]) -> Option<&SectorEigen> {
        self.sectors.iter().find(|s| s.charge == charge)
    }

    pub fn evolve(&self, psi: &PureState, t: f64) -> Result<PureState> {
        if psi.space != self.space {
            return Err(Error::Dimension("state and propagator live on different spaces".into()));
        }
        let mut out = DVector::zeros(psi.dim());
        for s in &self.sectors {
            let local = DVector::from_iterator(s.dim(), s.indices.iter().map(|&i| psi.amps[i]));
            if local.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            let mut coeff = s.vectors.adjoint() * local;
            for (c, e) in coeff.iter_mut().zip(&s.energies) {
                *c *= C64::from_polar(1.0, -(e * t).rem_euclid(2.0 * std::f64::consts::PI));
            }
            let back = &s.vectors * coeff;
            for (r, &i) in s.indices.iter().enumerate() {
                out[i] = back[r];
            }
        }
        Ok(PureState { space: self.space.clone(), amps: out })
    }

    pub fn energy(&self, psi: &PureState) -> f64 {
        self.sectors
            .iter()
            .map(|s| {
                let local = DVector::from_iterator(s.dim(), s.indices.iter().map(|&i| psi.amps[i]));
                let coeff = s.vectors.adjoint() * local;
                coeff.iter().zip(&s.energies).map(|(c, e)| c.norm_sqr() * e).sum::<f64>()
            })
            .sum()
    }

    /// Probability in each conserved-charge block, in sector order.
    pub fn sector_populations(&self, psi: &PureState) -> Vec<f64> {
        self.sectors
            .iter()
            .map(|s| s.indices.iter().map(|&i| psi.amps[i].norm_sqr()).sum())
            .collect()
    }
}

/// exp(−iHt)|ψ>.
pub fn evolve(psi: &PureState, spec: &HamiltonianSpec, t: f64) -> Result<PureState> {
    Propagator::new(spec, &psi.space)?.evolve(psi, t)
}

/// Qubit frequencies Ω_p = √(Δ_p² + ε²) with Δ_p ~ N(mean_gap, (sigma_frac·mean_gap)²).
pub fn tavis_disorder_draw(mean_gap: f64, sigma_frac: f64, epsilon: f64, m: usize, seed: u64) -> Result<Vec<f64>> {
    let sd = sigma_frac * mean_gap;
    let normal = Normal::new(mean_gap, sd.abs())
        .map_err(|e| Error::Parameter(format!("disorder distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..m)
        .map(|_| {
            let delta = if sd == 0.0 { mean_gap } else { normal.sample(&mut rng) };
            (delta * delta + epsilon * epsilon).sqrt()
        })
        .collect())
}
