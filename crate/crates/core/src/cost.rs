//! Bit and byte accounting for coded forests.

use std::collections::BTreeMap;
use std::fmt;

/// What a report's ratio is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    /// One byte per base block: the uncoded vector field.
    Bytes(usize),
    /// One bit per base block: uncoded inter/intra decisions.
    DecisionBits(usize),
}

impl Baseline {
    pub fn units(self) -> usize {
        match self {
            Baseline::Bytes(n) | Baseline::DecisionBits(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub min_block: usize,
    /// Terminal count per block side.
    pub counts: BTreeMap<usize, usize>,
    pub tree_bits: usize,
    pub vector_bytes: usize,
    pub flag_bits: usize,
    /// Size of the whole padded stream.
    pub total_bytes: usize,
    pub baseline: Baseline,
    pub ratio_percent: f64,
}

impl CostReport {
    pub(crate) fn interframe(
        min_block: usize,
        counts: BTreeMap<usize, usize>,
        tree_bits: usize,
        vector_bytes: usize,
        flag_bits: usize,
        base_blocks: usize,
    ) -> Self {
        let total_bytes = (flag_bits + tree_bits + 8 * vector_bytes).div_ceil(8);
        CostReport {
            min_block,
            counts,
            tree_bits,
            vector_bytes,
            flag_bits,
            total_bytes,
            baseline: Baseline::Bytes(base_blocks),
            ratio_percent: 100.0 * total_bytes as f64 / base_blocks as f64,
        }
    }

    /// Overhead-only accounting for decision streams: flag and tree bits
    /// against one bit per base block.
    pub(crate) fn decisions(
        min_block: usize,
        counts: BTreeMap<usize, usize>,
        tree_bits: usize,
        vector_bytes: usize,
        flag_bits: usize,
        base_blocks: usize,
    ) -> Self {
        CostReport {
            min_block,
            counts,
            tree_bits,
            vector_bytes,
            flag_bits,
            total_bytes: (flag_bits + tree_bits + 8 * vector_bytes).div_ceil(8),
            baseline: Baseline::DecisionBits(base_blocks),
            ratio_percent: 100.0 * (flag_bits + tree_bits) as f64 / base_blocks as f64,
        }
    }

    /// Rows of `(side, terminals, equivalent base blocks)`, smallest side
    /// first.
    pub fn equivalent_subimages(&self) -> Vec<(usize, usize, usize)> {
        self.counts
            .iter()
            .map(|(&side, &n)| {
                let k = side / self.min_block;
                (side, n, n * k * k)
            })
            .collect()
    }

    pub fn equivalent_total(&self) -> usize {
        self.equivalent_subimages().iter().map(|r| r.2).sum()
    }

    pub fn terminal_count(&self) -> usize {
        self.counts.values().sum()
    }

    /// Cost in the baseline's unit: bytes for vector streams, bits for
    /// decision streams.
    pub fn coded_units(&self) -> usize {
        match self.baseline {
            Baseline::Bytes(_) => self.total_bytes,
            Baseline::DecisionBits(_) => self.flag_bits + self.tree_bits,
        }
    }

    pub fn total_bits(&self) -> usize {
        self.flag_bits + self.tree_bits + 8 * self.vector_bytes
    }

    /// `100:X` with one decimal.
    pub fn ratio_decimal(&self) -> String {
        format!("100:{:.1}", self.ratio_percent)
    }

    /// `100:X` rounded half-to-even to an integer.
    pub fn ratio_integer(&self) -> String {
        format!("100:{}", round_half_even(self.ratio_percent))
    }

    /// `N:c` (or `16:c`) short form used in bound tables: baseline units
    /// against coded units.
    pub fn fraction(&self) -> String {
        format!("{}:{}", self.baseline.units(), self.coded_units())
    }
}

pub fn round_half_even(x: f64) -> i64 {
    let r = x.round();
    if (x - x.trunc()).abs() == 0.5 && r as i64 % 2 != 0 {
        (r - x.signum()) as i64
    } else {
        r as i64
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12}{:>12}{:>16}", "BLOCK SIZE", "N° BLOCKS", "EQ. SUBIMAGES")?;
        for (side, n, eq) in self.equivalent_subimages() {
            writeln!(f, "{:<12}{:>12}{:>16}", format!("{side}x{side}"), n, eq)?;
        }
        writeln!(f, "{:<12}{:>12}{:>16}", "", "", self.equivalent_total())?;
        writeln!(f, "flag bits:    {}", self.flag_bits)?;
        writeln!(f, "tree bits:    {}", self.tree_bits)?;
        writeln!(f, "vector bytes: {}", self.vector_bytes)?;
        writeln!(f, "total bytes:  {}", self.total_bytes)?;
        let unit = match self.baseline {
            Baseline::Bytes(_) => "bytes",
            Baseline::DecisionBits(_) => "decision bits",
        };
        write!(
            f,
            "ratio:        {}/{} {unit} = {:.2}% ({}, {})",
            self.coded_units(),
            self.baseline.units(),
            self.ratio_percent,
            self.ratio_decimal(),
            self.ratio_integer()
        )
    }
}
