//! Flat indexing of the integration variables on the closed-time contour.
//!
//! The system lives on two real-time branches, `x_0..x_{N_t-1}` forward and
//! `x̃_0..x̃_{N_t-1}` backward; the final values `x_F`, `x̃_F` are boundary data.
//! Every environment oscillator forms a closed ring:
//!
//! ```text
//!   q_0 ── q_1 ── … ── q_{N_t}            forward branch
//!    │                   │ (trace: q̃_{N_t} ≡ q_{N_t})
//!    │     q̃_0 ── … ── q̃_{N_t-1}          backward branch
//!    │      │
//!    └─ q̃_0(N_β-1) … q̃_0(1) ─┘            Euclidean leg, q̃_0(N_β) ≡ q_0, q̃_0(0) ≡ q̃_0
//! ```
//!
//! Layout: forward system nodes, backward system nodes, then one block of
//! `2N_t + N_β` nodes per oscillator (forward, backward, Euclidean interior).

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    ForwardSystem,
    BackwardSystem,
    ForwardEnv,
    BackwardEnv,
    EuclideanEnv,
}

/// A point of the contour before identifications are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    /// `x_n` (forward) or `x̃_n` (backward), `n = 0..=N_t`.
    System { branch: Branch, slice: usize },
    /// `q^k_n` (forward) or `q̃^k_n` (backward), `n = 0..=N_t`.
    Env {
        osc: usize,
        branch: Branch,
        slice: usize,
    },
    /// `q̃^k_0(j)`, `j = 0..=N_β`.
    Thermal { osc: usize, step: usize },
}

/// Where a contour point ends up: an integration variable or a fixed final system coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    Var(usize),
    FinalForward,
    FinalBackward,
}

impl Site {
    pub fn var(self) -> Option<usize> {
        match self {
            Site::Var(i) => Some(i),
            _ => None,
        }
    }
}

/// Nearest-neighbour link; `step` is the time slice (or Euclidean step) of endpoint `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub segment: Segment,
    pub osc: Option<usize>,
    pub step: usize,
    pub a: Site,
    pub b: Site,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContourIndex {
    n_t: usize,
    n_beta: usize,
    n_env: usize,
}

impl ContourIndex {
    pub fn new(n_t: usize, n_beta: usize, n_env: usize) -> Result<Self> {
        if n_t == 0 {
            return Err(domain("n_t must be >= 1"));
        }
        if n_beta == 0 {
            return Err(domain("n_beta must be >= 1"));
        }
        Ok(Self { n_t, n_beta, n_env })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn n_env(&self) -> usize {
        self.n_env
    }

    /// Total number of integration variables, `2N_t(1 + N_E) + N_β N_E`.
    pub fn dim(&self) -> usize {
        2 * self.n_t * (1 + self.n_env) + self.n_beta * self.n_env
    }

    /// Variables per oscillator ring, `2N_t + N_β`.
    pub fn ring_len(&self) -> usize {
        2 * self.n_t + self.n_beta
    }

    fn ring_base(&self, osc: usize) -> usize {
        2 * self.n_t + osc * self.ring_len()
    }

    /// Flat indices of the system variables (both branches).
    pub fn system_indices(&self) -> std::ops::Range<usize> {
        0..2 * self.n_t
    }

    /// Applies the boundary identifications and returns the surviving site.
    ///
    /// Returns `None` for nodes outside the contour.
    pub fn site(&self, node: Node) -> Option<Site> {
        let n_t = self.n_t;
        match node {
            Node::System { branch, slice } => match (branch, slice.cmp(&n_t)) {
                (_, std::cmp::Ordering::Greater) => None,
                (Branch::Forward, std::cmp::Ordering::Equal) => Some(Site::FinalForward),
                (Branch::Backward, std::cmp::Ordering::Equal) => Some(Site::FinalBackward),
                (Branch::Forward, _) => Some(Site::Var(slice)),
                (Branch::Backward, _) => Some(Site::Var(n_t + slice)),
            },
            Node::Env { osc, branch, slice } => {
                if osc >= self.n_env || slice > n_t {
                    return None;
                }
                let base = self.ring_base(osc);
                match branch {
                    Branch::Forward => Some(Site::Var(base + slice)),
                    Branch::Backward if slice == n_t => Some(Site::Var(base + n_t)),
                    Branch::Backward => Some(Site::Var(base + n_t + 1 + slice)),
                }
            }
            Node::Thermal { osc, step } => {
                if osc >= self.n_env || step > self.n_beta {
                    return None;
                }
                if step == 0 {
                    self.site(Node::Env {
                        osc,
                        branch: Branch::Backward,
                        slice: 0,
                    })
                } else if step == self.n_beta {
                    self.site(Node::Env {
                        osc,
                        branch: Branch::Forward,
                        slice: 0,
                    })
                } else {
                    Some(Site::Var(self.ring_base(osc) + 2 * n_t + step))
                }
            }
        }
    }

    /// Flat index of a node, or `None` if it is a fixed boundary value.
    pub fn index_of(&self, node: Node) -> Option<usize> {
        self.site(node).and_then(Site::var)
    }

    /// Canonical node for a flat index (inverse of [`ContourIndex::index_of`]).
    pub fn node(&self, mu: usize) -> Option<Node> {
        let n_t = self.n_t;
        if mu >= self.dim() {
            return None;
        }
        if mu < n_t {
            return Some(Node::System {
                branch: Branch::Forward,
                slice: mu,
            });
        }
        if mu < 2 * n_t {
            return Some(Node::System {
                branch: Branch::Backward,
                slice: mu - n_t,
            });
        }
        let rel = mu - 2 * n_t;
        let osc = rel / self.ring_len();
        let r = rel % self.ring_len();
        Some(if r <= n_t {
            Node::Env {
                osc,
                branch: Branch::Forward,
                slice: r,
            }
        } else if r < 2 * n_t + 1 {
            Node::Env {
                osc,
                branch: Branch::Backward,
                slice: r - n_t - 1,
            }
        } else {
            Node::Thermal {
                osc,
                step: r - 2 * n_t,
            }
        })
    }

    /// Site of `q^k_n` / `q̃^k_n`; panics when out of range.
    pub fn env(&self, osc: usize, branch: Branch, slice: usize) -> Site {
        self.site(Node::Env { osc, branch, slice })
            .expect("oscillator and slice in range")
    }

    pub fn system(&self, branch: Branch, slice: usize) -> Site {
        self.site(Node::System { branch, slice })
            .expect("slice in range")
    }

    /// Every nearest-neighbour link of the contour, system links first.
    pub fn links(&self) -> Vec<Link> {
        let n_t = self.n_t;
        let mut out = Vec::with_capacity(2 * n_t + self.n_env * self.ring_len());
        for (branch, segment) in [
            (Branch::Forward, Segment::ForwardSystem),
            (Branch::Backward, Segment::BackwardSystem),
        ] {
            for n in 0..n_t {
                out.push(Link {
                    segment,
                    osc: None,
                    step: n,
                    a: self.system(branch, n),
                    b: self.system(branch, n + 1),
                });
            }
        }
        for osc in 0..self.n_env {
            for (branch, segment) in [
                (Branch::Forward, Segment::ForwardEnv),
                (Branch::Backward, Segment::BackwardEnv),
            ] {
                for n in 0..n_t {
                    out.push(Link {
                        segment,
                        osc: Some(osc),
                        step: n,
                        a: self.env(osc, branch, n),
                        b: self.env(osc, branch, n + 1),
                    });
                }
            }
            for j in 0..self.n_beta {
                let at = |step| {
                    self.site(Node::Thermal { osc, step })
                        .expect("step in range")
                };
                out.push(Link {
                    segment: Segment::EuclideanEnv,
                    osc: Some(osc),
                    step: j,
                    a: at(j),
                    b: at(j + 1),
                });
            }
        }
        out
    }
}

/// Alias matching the operation name used by callers.
pub fn build_contour(n_t: usize, n_beta: usize, n_env: usize) -> Result<ContourIndex> {
    ContourIndex::new(n_t, n_beta, n_env)
}
