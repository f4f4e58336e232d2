use super::arith::{clamp_prob, PROB_ONE};

pub const DEFAULT_RATE: u32 = 5;

/// Order-0 adaptive estimate of the probability of a 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdaptiveBitModel {
    p1: u32,
    rate: u32,
}

impl Default for AdaptiveBitModel {
    fn default() -> Self {
        Self::new(DEFAULT_RATE)
    }
}

impl AdaptiveBitModel {
    pub fn new(rate: u32) -> Self {
        Self::with_p1(PROB_ONE / 2, rate)
    }

    pub fn with_p1(p1: u32, rate: u32) -> Self {
        Self { p1: clamp_prob(p1), rate }
    }

    #[inline]
    pub fn p1(&self) -> u32 {
        self.p1
    }

    pub fn rate(&self) -> u32 {
        self.rate
    }

    /// `p1 += ((bit << 16) - p1) >> rate`, clamped to `[1, 65535]`.
    #[inline]
    pub fn update(&mut self, bit: bool) {
        let target = if bit { PROB_ONE as i32 } else { 0 };
        let p = self.p1 as i32;
        self.p1 = clamp_prob((p + ((target - p) >> self.rate)) as u32);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_formula() {
        let mut m = AdaptiveBitModel::new(5);
        m.update(true);
        assert_eq!(m.p1(), 33792);
    }

    #[test]
    fn ones_push_toward_upper_clamp() {
        let mut m = AdaptiveBitModel::new(5);
        let mut prev = m.p1();
        for _ in 0..2000 {
            m.update(true);
            assert!(m.p1() >= prev);
            assert!(m.p1() <= 65535);
            prev = m.p1();
        }
        assert!(prev > 65000);
    }

    #[test]
    fn zeros_never_reach_zero() {
        let mut m = AdaptiveBitModel::new(2);
        for _ in 0..5000 {
            m.update(false);
            assert!(m.p1() >= 1);
        }
        assert_eq!(m.p1(), 1);
    }
}
