//! Tmote Sky current-draw energy model.
//!
//! Time is counted in timer ticks of 1/32768 s. Energy in millijoules is
//!
//! ```text
//! (transmit * 19.5 mA + listen * 21.8 mA + cpu * 1.8 mA + lpm * 0.0545 mA) * 3 V / 32768
//! ```

use serde::{Deserialize, Serialize};

use crate::topology::Network;

pub const TICKS_PER_SECOND: u64 = 32_768;
pub const SUPPLY_VOLTS: f64 = 3.0;
pub const TRANSMIT_MA: f64 = 19.5;
pub const LISTEN_MA: f64 = 21.8;
pub const CPU_MA: f64 = 1.8;
pub const LPM_MA: f64 = 0.0545;

/// Seconds to ticks, rounded to the nearest tick.
pub fn ticks(seconds: f64) -> u64 {
    (seconds * TICKS_PER_SECOND as f64).round() as u64
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub transmit_ticks: u64,
    pub listen_ticks: u64,
    pub cpu_ticks: u64,
    pub lpm_ticks: u64,
}

/// How the final scale factor of the energy formula is read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyScale {
    /// Divide by the 32768 ticks per second of the mote timer.
    #[default]
    TicksPerSecond,
    /// Evaluate `* 3 / 4096 * 8` left to right, as printed.
    Literal,
}

impl EnergyLedger {
    pub fn total_ticks(&self) -> u64 {
        self.cpu_ticks + self.lpm_ticks
    }
}

pub fn node_energy(ledger: &EnergyLedger) -> f64 {
    node_energy_scaled(ledger, EnergyScale::TicksPerSecond)
}

pub fn node_energy_scaled(ledger: &EnergyLedger, scale: EnergyScale) -> f64 {
    let charge = ledger.transmit_ticks as f64 * TRANSMIT_MA
        + ledger.listen_ticks as f64 * LISTEN_MA
        + ledger.cpu_ticks as f64 * CPU_MA
        + ledger.lpm_ticks as f64 * LPM_MA;
    match scale {
        EnergyScale::TicksPerSecond => charge * SUPPLY_VOLTS / TICKS_PER_SECOND as f64,
        EnergyScale::Literal => charge * SUPPLY_VOLTS / 4096.0 * 8.0,
    }
}

/// Sum over every node, sink and mobiles included.
pub fn total_energy(network: &Network) -> f64 {
    network.nodes().iter().map(|n| node_energy(&n.energy)).sum()
}
