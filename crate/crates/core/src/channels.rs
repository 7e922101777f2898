//! Problem configuration and the classification of box-eigenstate channels.
//!
//! Channel `n` carries the free particle's relative motion while the confined
//! particle sits in box state `n`. Its sign-indefinite "channel energy"
//!
//! ```text
//! a_n = (m1/m2) (pi/L)^2 (n^2 - n0^2) - k0^2
//! ```
//!
//! decides whether the channel propagates (`a_n < 0`, wavenumber
//! `k_n = sqrt(-a_n)`) or is evanescent (`a_n > 0`, decay rate
//! `lambda_n = sqrt(a_n)`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative width of the band around `a_n = 0` that is rejected as a threshold
/// configuration, measured against `max(k0^2, (pi/L)^2)`.
pub const THRESHOLD_RELATIVE_TOLERANCE: f64 = 1e-10;

/// Physical inputs of one scattering problem.
///
/// `mass1` is the free particle, `mass2` the confined one, `coupling` is the
/// contact strength `mu0` (energy x length, positive = repulsive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub mass1: f64,
    pub mass2: f64,
    pub box_length: f64,
    pub coupling: f64,
    pub hbar: f64,
    pub k0: f64,
    pub n0: usize,
}

/// Dimensionless parameterization in units where `m1 = L = hbar = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensionless {
    /// Interaction strength `m1 L mu0 / hbar^2`.
    pub g: f64,
    pub lk0: f64,
    /// `g / (L k0)`.
    pub epsilon: f64,
    /// `L^2 k0^2`.
    pub e_tilde: f64,
}

impl ProblemConfig {
    /// Equal masses, `L = hbar = m = 1`, so `mu0 = g` and `k0 = L k0`.
    pub fn dimensionless(g: f64, lk0: f64, n0: usize) -> Result<Self> {
        let config = Self {
            mass1: 1.0,
            mass2: 1.0,
            box_length: 1.0,
            coupling: g,
            hbar: 1.0,
            k0: lk0,
            n0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass1", self.mass1),
            ("mass2", self.mass2),
            ("box_length", self.box_length),
            ("hbar", self.hbar),
            ("k0", self.k0),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and strictly positive, got {value}"
                )));
            }
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "coupling must be finite, got {}",
                self.coupling
            )));
        }
        if self.n0 == 0 {
            return Err(Error::InvalidConfig("n0 must be >= 1".into()));
        }
        let energy = self.total_energy();
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "total energy must be positive, got {energy}"
            )));
        }
        Ok(())
    }

    pub fn with_coupling(self, coupling: f64) -> Self {
        Self { coupling, ..self }
    }

    pub fn with_k0(self, k0: f64) -> Self {
        Self { k0, ..self }
    }

    /// `pi / L`, the wavenumber of the box ground state.
    pub fn mode_wavenumber(&self) -> f64 {
        PI / self.box_length
    }

    /// Energy of a free particle with wavenumber `k` plus the confined particle
    /// in box state `n`.
    pub fn outcome_energy(&self, n: usize, k: f64) -> f64 {
        let kinetic = self.hbar * self.hbar * k * k / (2.0 * self.mass1);
        let q = n as f64 * self.mode_wavenumber();
        kinetic + self.hbar * self.hbar * q * q / (2.0 * self.mass2)
    }

    /// Total energy of the incoming product state.
    pub fn total_energy(&self) -> f64 {
        self.outcome_energy(self.n0, self.k0)
    }

    /// Channel energy `a_n` (units 1/length^2).
    pub fn channel_a(&self, n: usize) -> f64 {
        let q = self.mode_wavenumber();
        // n^2 - n0^2 is formed in integers so that a_{n0} = -k0^2 exactly.
        let dn2 = (n as i128 * n as i128 - self.n0 as i128 * self.n0 as i128) as f64;
        self.mass1 / self.mass2 * q * q * dn2 - self.k0 * self.k0
    }

    pub fn threshold_tolerance(&self) -> f64 {
        let q = self.mode_wavenumber();
        THRESHOLD_RELATIVE_TOLERANCE * (self.k0 * self.k0).max(q * q)
    }

    pub fn to_dimensionless(&self) -> Dimensionless {
        to_dimensionless(self)
    }
}

/// Dimensionless numbers of a configuration. For unequal masses the mass unit
/// is `m1`.
pub fn to_dimensionless(config: &ProblemConfig) -> Dimensionless {
    let g = config.mass1 * config.box_length * config.coupling / (config.hbar * config.hbar);
    let lk0 = config.box_length * config.k0;
    Dimensionless {
        g,
        lk0,
        epsilon: g / lk0,
        e_tilde: lk0 * lk0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    Open { k: f64 },
    Closed { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    /// Box quantum number, 1-based.
    pub index: usize,
    pub a: f64,
    pub kind: ChannelKind,
}

impl Channel {
    /// Classifies a channel from its `a_n`. The caller is responsible for the
    /// threshold filter; `a == 0` is treated as closed.
    pub fn from_a(index: usize, a: f64) -> Self {
        let kind = if a < 0.0 {
            ChannelKind::Open { k: (-a).sqrt() }
        } else {
            ChannelKind::Closed { lambda: a.sqrt() }
        };
        Self { index, a, kind }
    }

    pub fn is_open(&self) -> bool {
        matches!(self.kind, ChannelKind::Open { .. })
    }

    /// Outgoing wavenumber of an open channel.
    pub fn wavenumber(&self) -> Option<f64> {
        match self.kind {
            ChannelKind::Open { k } => Some(k),
            ChannelKind::Closed { .. } => None,
        }
    }
}

/// Channels `1..=T` of a truncated expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTable {
    channels: Vec<Channel>,
    open_count: usize,
    n0: usize,
}

impl ChannelTable {
    /// Truncation order `T`.
    pub fn truncation(&self) -> usize {
        self.channels.len()
    }

    pub fn open_count(&self) -> usize {
        self.open_count
    }

    pub fn incident_index(&self) -> usize {
        self.n0
    }

    /// Channel `n` (1-based).
    pub fn get(&self, n: usize) -> Option<&Channel> {
        n.checked_sub(1).and_then(|i| self.channels.get(i))
    }

    /// Channel `n` (1-based). Panics when `n` is outside `1..=T`.
    pub fn channel(&self, n: usize) -> &Channel {
        &self.channels[n - 1]
    }

    pub fn incident(&self) -> &Channel {
        self.channel(self.n0)
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn open_channels(&self) -> impl Iterator<Item = &Channel> + '_ {
        self.channels.iter().filter(|c| c.is_open())
    }

    /// Like [`build_channels`] but accepts a truncation whose last channel is
    /// still open. Used for deliberately reduced models such as `T = 1`.
    pub fn forced(config: &ProblemConfig, truncation: usize) -> Result<Self> {
        classify_channels(config, truncation)
    }
}

fn classify_channels(config: &ProblemConfig, truncation: usize) -> Result<ChannelTable> {
    config.validate()?;
    if truncation < config.n0 {
        return Err(Error::InvalidConfig(format!(
            "truncation T = {truncation} must be >= n0 = {}",
            config.n0
        )));
    }
    let tolerance = config.threshold_tolerance();
    let channels = (1..=truncation)
        .map(|n| {
            let a = config.channel_a(n);
            if a.abs() <= tolerance {
                Err(Error::ThresholdChannel { n, a, tolerance })
            } else {
                Ok(Channel::from_a(n, a))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let open_count = channels.iter().filter(|c| c.is_open()).count();
    Ok(ChannelTable {
        channels,
        open_count,
        n0: config.n0,
    })
}

/// Classifies channels `1..=truncation`.
///
/// Fails with [`Error::ThresholdChannel`] if any `|a_n|` is within the
/// threshold tolerance and with [`Error::TruncationTooSmall`] if channel `T`
/// itself is open.
pub fn build_channels(config: &ProblemConfig, truncation: usize) -> Result<ChannelTable> {
    let table = classify_channels(config, truncation)?;
    if table.channel(truncation).is_open() {
        return Err(Error::TruncationTooSmall { truncation });
    }
    Ok(table)
}

/// Number of open channels without enumerating them:
/// `floor(sqrt(n0^2 + (m2/m1) (L k0 / pi)^2))`.
pub fn open_channel_count_closed_form(config: &ProblemConfig) -> Result<usize> {
    config.validate()?;
    let x = config.box_length * config.k0 / PI;
    let s = ((config.n0 * config.n0) as f64 + config.mass2 / config.mass1 * x * x).sqrt();
    let nearest = s.round().max(1.0) as usize;
    let a = config.channel_a(nearest);
    let tolerance = config.threshold_tolerance();
    if a.abs() <= tolerance {
        return Err(Error::ThresholdChannel {
            n: nearest,
            a,
            tolerance,
        });
    }
    Ok(s.floor() as usize)
}
