use crate::error::invalid;
use crate::Result;

/// Constraint length of the code.
pub const CONSTRAINT_LENGTH: usize = 7;
/// Generator polynomials in octal, MSB = current input bit.
pub const GENERATORS_OCTAL: (u32, u32) = (0o171, 0o133);
pub const CODE_RATE: f64 = 0.5;
const MEMORY: usize = CONSTRAINT_LENGTH - 1;
const STATES: usize = 1 << MEMORY;

/// Fixed rate-1/2, K=7 code with hard-decision decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CodecConfig;

impl CodecConfig {
    pub fn constraint_length(&self) -> usize {
        CONSTRAINT_LENGTH
    }

    pub fn generators_octal(&self) -> (u32, u32) {
        GENERATORS_OCTAL
    }

    pub fn rate(&self) -> f64 {
        CODE_RATE
    }

    /// Coded length for `info_bits` payload bits, tail included.
    pub fn coded_len(&self, info_bits: usize) -> usize {
        2 * (info_bits + MEMORY)
    }

    /// Largest payload that fits in `coded_bits`.
    pub fn info_len(&self, coded_bits: usize) -> Option<usize> {
        (coded_bits / 2).checked_sub(MEMORY)
    }
}

/// Output pair for register contents `reg` (bit 6 = current input).
fn branch(reg: usize) -> (u8, u8) {
    let (g0, g1) = GENERATORS_OCTAL;
    (
        ((reg as u32 & g0).count_ones() & 1) as u8,
        ((reg as u32 & g1).count_ones() & 1) as u8,
    )
}

/// Rate-1/2 encoding with six zero tail bits; output length 2·(n + 6).
pub fn conv_encode(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 * (bits.len() + MEMORY));
    let mut state = 0usize;
    for &b in bits.iter().chain(std::iter::repeat(&0u8).take(MEMORY)) {
        let reg = ((b as usize & 1) << MEMORY) | state;
        let (o0, o1) = branch(reg);
        out.push(o0);
        out.push(o1);
        state = reg >> 1;
    }
    out
}

/// Hard-decision maximum-likelihood decoding of a zero-tail codeword.
pub fn viterbi_decode(bits: &[u8]) -> Result<Vec<u8>> {
    viterbi_decode_with_erasures(bits, None)
}

/// As [`viterbi_decode`]; coded positions flagged in `erased` add nothing
/// to the path metric.
pub fn viterbi_decode_with_erasures(bits: &[u8], erased: Option<&[bool]>) -> Result<Vec<u8>> {
    if bits.len() % 2 != 0 || bits.len() < 2 * (MEMORY + 1) {
        return Err(invalid(format!(
            "codeword length must be even and at least {}, got {}",
            2 * (MEMORY + 1),
            bits.len()
        )));
    }
    if let Some(e) = erased {
        if e.len() != bits.len() {
            return Err(invalid(format!(
                "{} erasure flags for {} coded bits",
                e.len(),
                bits.len()
            )));
        }
    }
    let steps = bits.len() / 2;
    let table: Vec<(u8, u8)> = (0..2 * STATES).map(branch).collect();
    const UNREACHED: u32 = u32::MAX / 2;
    let mut metric = vec![UNREACHED; STATES];
    metric[0] = 0;
    let mut next = vec![0u32; STATES];
    // Predecessor state of each state at each step.
    let mut from = vec![0u8; steps * STATES];
    for t in 0..steps {
        let (r0, r1) = (bits[2 * t], bits[2 * t + 1]);
        let (e0, e1) = erased.map_or((false, false), |e| (e[2 * t], e[2 * t + 1]));
        next.iter_mut().for_each(|m| *m = u32::MAX);
        for (s, &m) in metric.iter().enumerate() {
            if m >= UNREACHED {
                continue;
            }
            for b in 0..2usize {
                let reg = (b << MEMORY) | s;
                let (o0, o1) = table[reg];
                let cost = (!e0 && o0 != r0) as u32 + (!e1 && o1 != r1) as u32;
                let ns = reg >> 1;
                let cand = m + cost;
                // Ties keep the first (smaller) predecessor for determinism.
                if cand < next[ns] {
                    next[ns] = cand;
                    from[t * STATES + ns] = s as u8;
                }
            }
        }
        std::mem::swap(&mut metric, &mut next);
    }
    let mut state = 0usize;
    let mut decoded = vec![0u8; steps];
    for t in (0..steps).rev() {
        decoded[t] = (state >> (MEMORY - 1)) as u8 & 1;
        state = from[t * STATES + state] as usize;
    }
    decoded.truncate(steps - MEMORY);
    Ok(decoded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    /// Shift-register reference: tap lists read straight off the octal digits.
    fn reference_encode(bits: &[u8]) -> Vec<u8> {
        let g0 = [1, 1, 1, 1, 0, 0, 1];
        let g1 = [1, 0, 1, 1, 0, 1, 1];
        let mut reg = [0u8; 7];
        let mut out = Vec::new();
        for &b in bits.iter().chain([0u8; 6].iter()) {
            reg.rotate_right(1);
            reg[0] = b;
            out.push(reg.iter().zip(&g0).map(|(r, g)| r & g).sum::<u8>() & 1);
            out.push(reg.iter().zip(&g1).map(|(r, g)| r & g).sum::<u8>() & 1);
        }
        out
    }

    fn hamming(a: &[u8], b: &[u8]) -> usize {
        a.iter().zip(b).filter(|(x, y)| x != y).count()
    }

    #[test]
    fn zero_input_encodes_to_zeros() {
        let out = conv_encode(&[0; 10]);
        assert_eq!(out.len(), 32);
        assert!(out.iter().all(|&b| b == 0));
    }

    #[test]
    fn impulse_response() {
        let out = conv_encode(&[1]);
        assert_eq!(out, vec![1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 1, 1]);
        assert_eq!(out, reference_encode(&[1]));
    }

    #[test]
    fn encoder_matches_shift_register_reference() {
        let mut rng = stream(31, 0);
        for len in [0usize, 1, 7, 50] {
            let bits: Vec<u8> = (0..len).map(|_| rng.random_range(0..2u8)).collect();
            assert_eq!(conv_encode(&bits), reference_encode(&bits));
        }
    }

    #[test]
    fn malformed_lengths_rejected() {
        assert!(viterbi_decode(&[0; 13]).is_err());
        assert!(viterbi_decode(&[0; 12]).is_err());
        assert_eq!(viterbi_decode(&[0; 14]).unwrap(), vec![0]);
    }

    #[test]
    fn matches_exhaustive_ml_search() {
        let mut rng = stream(32, 0);
        let k = 8;
        let codebook: Vec<(Vec<u8>, Vec<u8>)> = (0..1u32 << k)
            .map(|w| {
                let msg: Vec<u8> = (0..k).map(|i| (w >> i) as u8 & 1).collect();
                (conv_encode(&msg), msg)
            })
            .collect();
        for _ in 0..200 {
            let msg: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
            let mut rx = conv_encode(&msg);
            for b in rx.iter_mut() {
                if rng.random_bool(0.08) {
                    *b ^= 1;
                }
            }
            let dec = viterbi_decode(&rx).unwrap();
            let best = codebook.iter().map(|(c, _)| hamming(c, &rx)).min().unwrap();
            assert_eq!(hamming(&conv_encode(&dec), &rx), best);
        }
    }

    #[test]
    fn corrects_single_flip_anywhere() {
        let mut rng = stream(33, 0);
        let msg: Vec<u8> = (0..40).map(|_| rng.random_range(0..2u8)).collect();
        let code = conv_encode(&msg);
        for i in 0..code.len() {
            let mut rx = code.clone();
            rx[i] ^= 1;
            assert_eq!(viterbi_decode(&rx).unwrap(), msg);
        }
    }

    #[test]
    fn erasures_are_ignored() {
        let mut rng = stream(34, 0);
        let msg: Vec<u8> = (0..40).map(|_| rng.random_range(0..2u8)).collect();
        let mut rx = conv_encode(&msg);
        let mut erased = vec![false; rx.len()];
        for i in (0..rx.len()).step_by(7) {
            rx[i] ^= 1;
            erased[i] = true;
        }
        assert_eq!(
            viterbi_decode_with_erasures(&rx, Some(&erased)).unwrap(),
            msg
        );
    }

    #[test]
    fn random_input_gives_half_errors() {
        let mut rng = stream(35, 0);
        let msg: Vec<u8> = (0..20_000).map(|_| rng.random_range(0..2u8)).collect();
        let noise: Vec<u8> = (0..conv_encode(&msg).len())
            .map(|_| rng.random_range(0..2u8))
            .collect();
        let dec = viterbi_decode(&noise).unwrap();
        let ber = hamming(&dec, &msg) as f64 / msg.len() as f64;
        assert!((ber - 0.5).abs() < 0.02, "{ber}");
    }
}
