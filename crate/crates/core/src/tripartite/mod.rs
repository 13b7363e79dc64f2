//! Three-body measurement: the system couples to a probe through `α A⊗Q`,
//! the probe drives a pointer through `β P⊗B`, and the probe is traced out.
//!
//! With probe and pointer momentum-limited, tracing the probe multiplies each
//! system coherence by an overlap that vanishes identically once
//! `α |a_k − a_l| / ħ > 2κ0`, and the pointer states `ρ_k` have vanishing
//! products once the induced coupling and α pass two further thresholds.
//!
//! Conventions fixed against the brute-force [`dense_oracle`]:
//!
//! ```text
//! β = 2λ/α
//! J_kl(b, b') = ∫ dq e^{−iα(a_k−a_l)q/ħ} ψ(q − βb) conj ψ(q − βb')
//! ρ((k,b),(l,b')) = c_k conj(c_l) e^{iλ(a_k b − a_l b')/ħ} Φ0(b) conj Φ0(b') J_kl(b, b')
//! ρ_k(b, b') = e^{iλ a_k (b − b')/ħ} F(b' − b) Φ0(b) conj Φ0(b'),  F(η) = A(βη)
//! S_kl(b, b') = ∫ db'' e^{iλ(a_l−a_k)b''/ħ} |Φ0(b'')|² F(b' − b'') F(b'' − b)
//! ```

mod kernels;
mod model;
mod oracle;
mod pvm;
mod sweep;
mod thresholds;

pub use kernels::{
    coherence_kernel, coherence_matrix, orthogonality_kernel, pointer_gram, pointer_state, pointer_states,
    reduced_density,
};
pub use model::{Couplings, MeasurementModel};
pub use oracle::{default_q_grid_size, dense_oracle, effective_coupling, COVERAGE_TOL};
pub use pvm::{extract_pvm, Pvm, PvmChecks, DEFAULT_RANK_TOL};
pub use sweep::{
    coherence_sweep, report_from_rows, sweep_point, validate_alphas, DecoherenceReport, SweepOptions, SweepRow,
};
pub use thresholds::{thresholds, thresholds_from, Thresholds};

#[cfg(test)]
mod tests;
