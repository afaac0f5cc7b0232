use rand::Rng;

use super::chirp::Comb;
use crate::error::{invalid, mismatch};
use crate::{rng, Complex64, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Seed of the fixed pilot sequence shared by transmitter and receiver.
const PILOT_SEED: u64 = 0x5052_535f_5049_4c54;

/// Gray-mapped unit-energy QPSK: bit pair (b0, b1) sets the signs of the
/// imaginary and real parts respectively.
pub fn qpsk_map(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(invalid(format!(
            "QPSK needs an even bit count, got {}",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|p| {
            let re = if p[1] == 0 {
                FRAC_1_SQRT_2
            } else {
                -FRAC_1_SQRT_2
            };
            let im = if p[0] == 0 {
                FRAC_1_SQRT_2
            } else {
                -FRAC_1_SQRT_2
            };
            Complex64::new(re, im)
        })
        .collect())
}

/// Hard-decision inverse of [`qpsk_map`].
pub fn qpsk_demap(symbols: &[Complex64]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * 2);
    for s in symbols {
        bits.push(u8::from(s.im < 0.0));
        bits.push(u8::from(s.re < 0.0));
    }
    bits
}

/// M×N frequency-domain symbols X_m(n) with a payload mask.
///
/// Elements outside the mask are pilots (known QPSK values) or zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    n_symbols: usize,
    n_subcarriers: usize,
    symbols: Vec<Complex64>,
    data_mask: Vec<bool>,
}

impl ResourceGrid {
    pub fn zeros(n_symbols: usize, n_subcarriers: usize) -> Self {
        Self {
            n_symbols,
            n_subcarriers,
            symbols: vec![Complex64::new(0.0, 0.0); n_symbols * n_subcarriers],
            data_mask: vec![false; n_symbols * n_subcarriers],
        }
    }

    /// Grid from explicit values; rejects grids whose active elements do not
    /// average to unit power.
    pub fn from_parts(
        n_symbols: usize,
        n_subcarriers: usize,
        symbols: Vec<Complex64>,
        data_mask: Vec<bool>,
    ) -> Result<Self> {
        let len = n_symbols * n_subcarriers;
        if symbols.len() != len || data_mask.len() != len {
            return Err(mismatch(format!(
                "grid {n_symbols}x{n_subcarriers} needs {len} elements, got {} symbols and {} mask flags",
                symbols.len(),
                data_mask.len()
            )));
        }
        let grid = Self {
            n_symbols,
            n_subcarriers,
            symbols,
            data_mask,
        };
        let p = grid.active_mean_power();
        if p != 0.0 && (p - 1.0).abs() > 1e-12 {
            return Err(invalid(format!(
                "active resource elements must have unit mean power, got {p}"
            )));
        }
        Ok(grid)
    }

    /// Every element carries random QPSK data.
    pub fn random_qpsk<R: Rng + ?Sized>(
        n_symbols: usize,
        n_subcarriers: usize,
        rng: &mut R,
    ) -> Self {
        let mut grid = Self::zeros(n_symbols, n_subcarriers);
        grid.data_mask.iter_mut().for_each(|d| *d = true);
        let bits: Vec<u8> = (0..2 * grid.symbols.len())
            .map(|_| rng.random_range(0..2u8))
            .collect();
        grid.symbols = qpsk_map(&bits).expect("even bit count");
        grid
    }

    /// Known pilots on a comb pattern, random QPSK data everywhere else.
    pub fn with_comb_pilots<R: Rng + ?Sized>(
        n_symbols: usize,
        n_subcarriers: usize,
        comb: &Comb,
        rng: &mut R,
    ) -> Self {
        let mut grid = Self::random_qpsk(n_symbols, n_subcarriers, rng);
        for m in 0..n_symbols {
            for n in 0..n_subcarriers {
                if comb.contains(m, n) {
                    let i = grid.index(m, n);
                    grid.symbols[i] = pilot_value(m, n);
                    grid.data_mask[i] = false;
                }
            }
        }
        grid
    }

    /// Copy keeping only the non-data (pilot) elements; data set to zero.
    pub fn pilots_only(&self) -> Self {
        let mut out = self.clone();
        for (s, &d) in out.symbols.iter_mut().zip(&self.data_mask) {
            if d {
                *s = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.symbols[self.index(m, n)]
    }

    pub fn set(&mut self, m: usize, n: usize, value: Complex64) {
        let i = self.index(m, n);
        self.symbols[i] = value;
    }

    pub fn is_data(&self, m: usize, n: usize) -> bool {
        self.data_mask[self.index(m, n)]
    }

    /// Row of symbol `m`.
    pub fn symbol(&self, m: usize) -> &[Complex64] {
        &self.symbols[m * self.n_subcarriers..(m + 1) * self.n_subcarriers]
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn data_mask(&self) -> &[bool] {
        &self.data_mask
    }

    pub fn data_count(&self) -> usize {
        self.data_mask.iter().filter(|&&d| d).count()
    }

    /// Payload values in row-major order.
    pub fn data_values(&self) -> Vec<Complex64> {
        self.symbols
            .iter()
            .zip(&self.data_mask)
            .filter(|(_, &d)| d)
            .map(|(s, _)| *s)
            .collect()
    }

    /// Writes payload values in row-major order over the data mask.
    pub fn fill_data(&mut self, values: &[Complex64]) -> Result<()> {
        if values.len() != self.data_count() {
            return Err(mismatch(format!(
                "grid has {} data elements, got {} values",
                self.data_count(),
                values.len()
            )));
        }
        let mut it = values.iter();
        for (s, &d) in self.symbols.iter_mut().zip(&self.data_mask) {
            if d {
                *s = *it.next().expect("length checked");
            }
        }
        Ok(())
    }

    fn active_mean_power(&self) -> f64 {
        let (sum, count) = self
            .symbols
            .iter()
            .filter(|s| s.norm_sqr() > 0.0)
            .fold((0.0, 0usize), |(s, c), x| (s + x.norm_sqr(), c + 1));
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    fn index(&self, m: usize, n: usize) -> usize {
        assert!(
            m < self.n_symbols && n < self.n_subcarriers,
            "resource element ({m}, {n}) out of range"
        );
        m * self.n_subcarriers + n
    }
}

/// Known pilot value for resource element (m, n).
pub(crate) fn pilot_value(m: usize, n: usize) -> Complex64 {
    let h = rng::stream_id(&[PILOT_SEED, m as u64, n as u64]);
    let re = if h & 1 == 0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    let im = if h & 2 == 0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn gray_mapping_table() {
        let s = qpsk_map(&[0, 0, 0, 1, 1, 1, 1, 0]).unwrap();
        let r = FRAC_1_SQRT_2;
        assert_eq!(s[0], Complex64::new(r, r));
        assert_eq!(s[1], Complex64::new(-r, r));
        assert_eq!(s[2], Complex64::new(-r, -r));
        assert_eq!(s[3], Complex64::new(r, -r));
        let energy: f64 = s.iter().map(|x| x.norm_sqr()).sum::<f64>() / 4.0;
        assert!((energy - 1.0).abs() < 1e-15);
    }

    #[test]
    fn odd_bit_count_rejected() {
        assert!(qpsk_map(&[0, 1, 1]).is_err());
    }

    #[test]
    fn map_demap_roundtrip() {
        let mut rng = stream(1, 0);
        let bits: Vec<u8> = (0..10_000).map(|_| rng.random_range(0..2u8)).collect();
        assert_eq!(qpsk_demap(&qpsk_map(&bits).unwrap()), bits);
    }

    #[test]
    fn comb_pilots_mask_and_power() {
        let mut rng = stream(2, 0);
        let comb = Comb::prs_comb4();
        let g = ResourceGrid::with_comb_pilots(4, 16, &comb, &mut rng);
        assert_eq!(g.data_count(), 4 * 12);
        assert!(!g.is_data(0, 0) && !g.is_data(1, 2) && !g.is_data(2, 1) && !g.is_data(3, 3));
        assert!((g.active_mean_power() - 1.0).abs() < 1e-12);
        let p = g.pilots_only();
        assert_eq!(p.get(0, 4), g.get(0, 4));
        assert_eq!(p.get(0, 1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn from_parts_checks_power() {
        let v = vec![Complex64::new(2.0, 0.0); 4];
        assert!(ResourceGrid::from_parts(1, 4, v, vec![true; 4]).is_err());
        assert!(
            ResourceGrid::from_parts(1, 3, vec![Complex64::new(1.0, 0.0); 4], vec![true; 4])
                .is_err()
        );
    }
}
