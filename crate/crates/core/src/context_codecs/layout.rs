//! Causal pixel neighbourhoods.

/// Twelve causal neighbours as `(dy, dx)`, ordered by distance to the
/// current pixel. The order-`m` contiguous context uses the first `m`.
///
/// ```text
///        11 9  6 10 12
///         7 3  2  4  8
///         5 1  X
/// ```
pub const NEIGHBOURS: [(isize, isize); 12] = [
    (0, -1),
    (-1, 0),
    (-1, -1),
    (-1, 1),
    (0, -2),
    (-2, 0),
    (-1, -2),
    (-1, 2),
    (-2, -1),
    (-2, 1),
    (-2, -2),
    (-2, 2),
];

/// Bit `k` of the result is neighbour `k + 1`; pixels outside the image read as 0.
#[inline]
pub fn neighbourhood_pattern(bits: &[bool], width: usize, x: usize, y: usize) -> u16 {
    let mut pattern = 0u16;
    for (k, &(dy, dx)) in NEIGHBOURS.iter().enumerate() {
        let ny = y as isize + dy;
        let nx = x as isize + dx;
        if ny >= 0 && nx >= 0 && (nx as usize) < width && bits[ny as usize * width + nx as usize] {
            pattern |= 1 << k;
        }
    }
    pattern
}

/// A context: the subset of [`NEIGHBOURS`] (as a bit set) it reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Context {
    pub neighbours: u16,
}

impl Context {
    pub fn order(self) -> u32 {
        self.neighbours.count_ones()
    }

    /// Number of distinct neighbourhood patterns, `2^order`.
    pub fn table_len(self) -> usize {
        1 << self.order()
    }

    /// Packs the selected neighbour bits of `pattern` into `0..2^order`.
    #[inline]
    pub fn index(self, pattern: u16) -> usize {
        if self.neighbours & (self.neighbours + 1) == 0 {
            return (pattern & self.neighbours) as usize;
        }
        let mut out = 0usize;
        let mut bit = 0;
        let mut sel = self.neighbours;
        while sel != 0 {
            let low = sel.trailing_zeros();
            out |= (((pattern >> low) & 1) as usize) << bit;
            bit += 1;
            sel &= sel - 1;
        }
        out
    }
}

/// The context family a codec mixes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextLayout {
    pub contexts: Vec<Context>,
}

impl ContextLayout {
    /// Orders `1..=max_order`, each extending the previous by one neighbour.
    pub fn contiguous(max_order: usize) -> Self {
        assert!((1..=12).contains(&max_order));
        let contexts = (1..=max_order).map(|m| Context { neighbours: (1u16 << m) - 1 }).collect();
        Self { contexts }
    }

    /// All 15 non-empty subsets of the four nearest neighbours, grouped by
    /// order: four singles, six pairs, four triples, one quadruple.
    pub fn nearest_four_subsets() -> Self {
        let mut subsets: Vec<u16> = (1u16..16).collect();
        subsets.sort_by_key(|s| (s.count_ones(), *s));
        Self { contexts: subsets.into_iter().map(|neighbours| Context { neighbours }).collect() }
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbours_are_causal_and_distinct() {
        for (i, &(dy, dx)) in NEIGHBOURS.iter().enumerate() {
            assert!(dy < 0 || (dy == 0 && dx < 0), "neighbour {} is not causal", i + 1);
            assert!(NEIGHBOURS[..i].iter().all(|&o| o != (dy, dx)));
        }
        let d2: Vec<isize> = NEIGHBOURS.iter().map(|(y, x)| y * y + x * x).collect();
        assert!(d2.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn contiguous_nesting() {
        let l = ContextLayout::contiguous(12);
        assert_eq!(l.len(), 12);
        for w in l.contexts.windows(2) {
            assert_eq!(w[0].neighbours & w[1].neighbours, w[0].neighbours);
            assert_eq!(w[1].order(), w[0].order() + 1);
        }
        assert_eq!(l.contexts[3].table_len(), 16);
    }

    #[test]
    fn xl_subsets() {
        let l = ContextLayout::nearest_four_subsets();
        let orders: Vec<u32> = l.contexts.iter().map(|c| c.order()).collect();
        assert_eq!(orders, vec![1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 4]);
        assert!(l.contexts.iter().all(|c| c.neighbours < 16));
    }

    #[test]
    fn index_packs_selected_bits() {
        let c = Context { neighbours: 0b1010 };
        assert_eq!(c.index(0b1111), 0b11);
        assert_eq!(c.index(0b1000), 0b10);
        assert_eq!(c.index(0b0101), 0);
        assert_eq!(Context { neighbours: 0b111 }.index(0b1101), 0b101);
    }

    #[test]
    fn pattern_reads_zero_outside() {
        let bits = vec![true; 9];
        assert_eq!(neighbourhood_pattern(&bits, 3, 0, 0), 0);
        // (1,1): W, N, NW, NE inside; WW, NN and the rest outside.
        assert_eq!(neighbourhood_pattern(&bits, 3, 1, 1), 0b1111);
        // (2,2): W, N, NW, WW, NN, NWW, NNW, NNWW inside.
        let p = neighbourhood_pattern(&bits, 3, 2, 2);
        assert_eq!(p, 0b0101_0111_0111);
    }
}
