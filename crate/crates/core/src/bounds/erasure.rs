use serde::{Deserialize, Serialize};

use crate::channels::ErasureParams;

/// Closed-form rates of the erasure wiretap channel with public erasure feedback.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErasureRates {
    /// Largest secrecy rate of the key-generation scheme.
    pub inner_kg: f64,
    /// Secrecy capacity.
    pub capacity: f64,
}

pub fn erasure_rates(p: ErasureParams) -> ErasureRates {
    let (d, de) = (p.delta(), p.delta_e());
    let lead = (1.0 - d) * de;
    if lead == 0.0 {
        return ErasureRates {
            inner_kg: 0.0,
            capacity: 0.0,
        };
    }
    let inner_kg = lead * ((1.0 - d) / (1.0 - d * de)).max(1.0 / (1.0 + de));
    let capacity = lead * (1.0 - d * de) / (1.0 - d * de * de);
    ErasureRates { inner_kg, capacity }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges() {
        let r = erasure_rates(ErasureParams::new(1.0, 1.0).unwrap());
        assert_eq!((r.inner_kg, r.capacity), (0.0, 0.0));
        let r = erasure_rates(ErasureParams::new(0.0, 0.4).unwrap());
        assert!((r.inner_kg - 0.4).abs() < 1e-15 && (r.capacity - 0.4).abs() < 1e-15);
    }
}
