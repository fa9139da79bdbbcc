//! Exact numerical study of Swendsen-Wang versus single-bond dynamics
//! for the random-cluster model on small graphs.
//!
//! The crate builds the full transition matrices of four reversible
//! dynamics (Swendsen-Wang, lazy/non-lazy single-bond, heat-bath,
//! Metropolis) on the space of edge subsets, represents Swendsen-Wang
//! and single-bond through the joint Potts/random-cluster operators
//! `M`, `M*` and `T_e`, and certifies the gap comparison
//! `gap(SW) >= gap(SB)` together with the closed-form tree, width and
//! torus bounds by enumeration and dense eigensolving.

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod joint;
pub mod models;
pub mod spectral;
pub mod suites;

pub use error::{Error, Result};
pub use graph::{EdgeSubset, Graph};
pub use models::ModelParams;

/// Size limits protecting dense-matrix construction.
#[derive(Debug, Clone, Copy)]
pub struct Caps {
    /// Maximum number of RC states (2^|E|) for dense matrices.
    pub max_rc_states: usize,
    /// Maximum number of joint states (q^|V| * 2^|E|).
    pub max_joint_states: usize,
    /// Maximum dimension for the dense eigensolver.
    pub dense_eigen: usize,
    /// Maximum dimension for mixing-time matrix powering.
    pub powering: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_rc_states: 1 << 24,
            max_joint_states: 1 << 22,
            dense_eigen: 4096,
            powering: 1024,
        }
    }
}

impl Caps {
    /// Reads the `RCDYN_MAX_STATES` override from the environment.
    pub fn from_env() -> Self {
        let mut caps = Caps::default();
        if let Ok(s) = std::env::var("RCDYN_MAX_STATES") {
            if let Ok(v) = s.parse::<usize>() {
                caps.max_rc_states = v;
                caps.max_joint_states = v;
            }
        }
        caps
    }

    pub fn check_rc(&self, n_states: usize) -> Result<()> {
        if n_states > self.max_rc_states {
            return Err(Error::SizeLimit {
                what: "RC state space".into(),
                requested: n_states,
                cap: self.max_rc_states,
            });
        }
        Ok(())
    }

    pub fn check_joint(&self, n_states: usize) -> Result<()> {
        if n_states > self.max_joint_states {
            return Err(Error::SizeLimit {
                what: "joint state space".into(),
                requested: n_states,
                cap: self.max_joint_states,
            });
        }
        Ok(())
    }
}
