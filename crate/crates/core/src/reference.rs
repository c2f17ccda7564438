//! Published benchmark frequency parameters for the Timoshenko beam
//! (`nu = 0.3`, `kappa = 5/6`), ten modes at seven thickness ratios.

use crate::assembly::BoundaryCondition;

/// Thickness ratios `h / L` of the benchmark columns.
pub const RATIOS: [f64; 7] = [0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2];

pub const MODES: usize = 10;

/// Pinned–pinned: classical value, then one entry per ratio.
#[allow(clippy::approx_constant)]
pub const PINNED_PINNED: [(f64, [f64; 7]); MODES] = [
    (3.14159, [3.1417, 3.1415, 3.1413, 3.1405, 3.135, 3.1157, 3.0453]),
    (6.28319, [6.2839, 6.2828, 6.2811, 6.2747, 6.2314, 6.0907, 5.6716]),
    (9.42478, [9.4271, 9.4234, 9.4177, 9.3964, 9.2554, 8.8405, 7.8395]),
    (12.5664, [12.5718, 12.5632, 12.5497, 12.4995, 12.1814, 11.3431, 9.6571]),
    (15.708, [15.7187, 15.7017, 15.6755, 15.5787, 14.9928, 13.6132, 11.2221]),
    (18.8496, [18.8682, 18.8388, 18.7937, 18.6286, 17.6812, 15.6792, 12.6023]),
    (21.9911, [22.021, 21.9742, 21.9028, 21.645, 20.245, 17.5707, 13.0323]),
    (25.1327, [25.1776, 25.1075, 25.0014, 24.6237, 22.6866, 19.3144, 13.4443]),
    (28.2743, [28.3388, 28.2386, 28.0882, 27.5614, 25.0117, 20.9328, 13.8434]),
    (31.4159, [31.5052, 31.3672, 31.162, 30.4553, 27.2271, 22.4445, 14.4378]),
];

/// Clamped–clamped: classical value, then one entry per ratio.
pub const CLAMPED_CLAMPED: [(f64, [f64; 7]); MODES] = [
    (4.73004, [4.72998, 4.72963, 4.72840, 4.72350, 4.68991, 4.57955, 4.24201]),
    (7.8532, [7.9272, 7.8877, 7.8606, 7.8321, 7.7042, 7.3314, 6.418]),
    (10.9956, [11.1019, 11.0423, 10.9991, 10.9396, 10.641, 9.8563, 8.2853]),
    (14.1372, [14.2781, 14.1946, 14.1304, 14.0223, 13.4622, 12.1456, 9.9038]),
    (17.2788, [17.4574, 17.3452, 17.2541, 17.0761, 16.1602, 14.2327, 11.3488]),
    (20.4204, [20.6401, 20.4939, 20.3685, 20.0964, 18.7332, 16.149, 12.6403]),
    (23.5619, [23.827, 23.6404, 23.4724, 23.0791, 21.184, 17.9218, 13.4567]),
    (26.7035, [27.0187, 26.7843, 26.5644, 26.0209, 23.5185, 19.5727, 13.8102]),
    (29.8451, [30.216, 29.9254, 29.6431, 28.9188, 25.7439, 21.1189, 14.4806]),
    (32.9867, [33.4195, 33.0636, 32.7075, 31.7707, 27.8682, 22.5739, 14.9384]),
];

/// Which benchmark table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Table {
    /// Pinned–pinned.
    One,
    /// Clamped–clamped.
    Two,
}

impl Table {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Table::One),
            2 => Some(Table::Two),
            _ => None,
        }
    }

    pub fn bc(self) -> BoundaryCondition {
        match self {
            Table::One => BoundaryCondition::PinnedPinned,
            Table::Two => BoundaryCondition::ClampedClamped,
        }
    }

    pub fn data(self) -> &'static [(f64, [f64; 7]); MODES] {
        match self {
            Table::One => &PINNED_PINNED,
            Table::Two => &CLAMPED_CLAMPED,
        }
    }

    /// Reference value for 1-based `mode` at ratio column `col`.
    pub fn value(self, mode: usize, col: usize) -> f64 {
        self.data()[mode - 1].1[col]
    }
}
