//! Taxel-array frames and the image-level preprocessing applied to them:
//! thresholding, connected-component segmentation, largest-region selection
//! and resolution pooling.
//!
//! Trials are stored one per file. The first line carries
//! `rows,cols,sample_rate,contact_threshold,label,velocity_setting,stiffness_setting`
//! and every following line holds one frame of `rows*cols` forces in
//! row-major order.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::category::{Category, Condition, Setting};

/// Default sensor layout: 24×16 taxels of 9 mm × 9 mm.
pub const DEFAULT_ROWS: usize = 24;
pub const DEFAULT_COLS: usize = 16;
pub const DEFAULT_PITCH: f64 = 0.009;
pub const DEFAULT_SAMPLE_RATE: f64 = 100.0;

#[derive(Debug, Error)]
pub enum TaxelError {
    #[error("grid must have at least one taxel (got {rows}x{cols})")]
    EmptyGrid { rows: usize, cols: usize },
    #[error("grid holds {actual} values but {rows}x{cols} needs {expected}")]
    LengthMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        actual: usize,
    },
    #[error("taxel {index} has invalid force {value}")]
    InvalidForce { index: usize, value: f64 },
    #[error("taxel pitch must be positive and finite (got {0})")]
    InvalidPitch(f64),
    #[error("{rows}x{cols} grid is not divisible by pooling factor {factor}")]
    NonDivisibleGrid { rows: usize, cols: usize, factor: usize },
    #[error("frame {index} is {rows}x{cols}, trial frames are {expected_rows}x{expected_cols}")]
    FrameShapeMismatch {
        index: usize,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("sample rate must be positive (got {0})")]
    InvalidSampleRate(f64),
    #[error("contact threshold must be non-negative (got {0})")]
    InvalidThreshold(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One time-sample of the force grid, in newtons per taxel.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxelFrame {
    rows: usize,
    cols: usize,
    pitch: f64,
    forces: Vec<f64>,
}

impl TaxelFrame {
    pub fn new(rows: usize, cols: usize, pitch: f64, forces: Vec<f64>) -> Result<Self, TaxelError> {
        if rows == 0 || cols == 0 {
            return Err(TaxelError::EmptyGrid { rows, cols });
        }
        if forces.len() != rows * cols {
            return Err(TaxelError::LengthMismatch {
                rows,
                cols,
                expected: rows * cols,
                actual: forces.len(),
            });
        }
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(TaxelError::InvalidPitch(pitch));
        }
        if let Some((index, &value)) = forces
            .iter()
            .enumerate()
            .find(|(_, f)| !(f.is_finite() && **f >= 0.0))
        {
            return Err(TaxelError::InvalidForce { index, value });
        }
        Ok(Self { rows, cols, pitch, forces })
    }

    pub fn zeros(rows: usize, cols: usize, pitch: f64) -> Result<Self, TaxelError> {
        Self::new(rows, cols, pitch, vec![0.0; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Edge length of one taxel in metres.
    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn forces(&self) -> &[f64] {
        &self.forces
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.forces[row * self.cols + col]
    }

    pub fn max_force(&self) -> f64 {
        self.forces.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_force(&self) -> f64 {
        self.forces.iter().sum()
    }

    /// Spatial resolution in taxels per square centimetre.
    pub fn taxels_per_cm2(&self) -> f64 {
        let pitch_cm = self.pitch * 100.0;
        1.0 / (pitch_cm * pitch_cm)
    }
}

/// Pixel connectivity used when segmenting contact regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn from_bits(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self, TaxelError> {
        if rows == 0 || cols == 0 {
            return Err(TaxelError::EmptyGrid { rows, cols });
        }
        if bits.len() != rows * cols {
            return Err(TaxelError::LengthMismatch {
                rows,
                cols,
                expected: rows * cols,
                actual: bits.len(),
            });
        }
        Ok(Self { rows, cols, bits })
    }

    /// Builds a mask with exactly the listed cells set.
    pub fn from_cells(rows: usize, cols: usize, cells: &[(usize, usize)]) -> Result<Self, TaxelError> {
        let mut bits = vec![false; rows * cols];
        for &(r, c) in cells {
            if r >= rows || c >= cols {
                return Err(TaxelError::Parse {
                    line: 0,
                    message: format!("cell ({r},{c}) outside {rows}x{cols} mask"),
                });
            }
            bits[r * cols + c] = true;
        }
        Self::from_bits(rows, cols, bits)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// A maximal connected set of in-contact taxels.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// Member cells in row-major order.
    pub taxels: Vec<(usize, usize)>,
    /// Mean (row, col) of the members.
    pub centroid: (f64, f64),
}

impl Component {
    fn from_cells(mut taxels: Vec<(usize, usize)>) -> Self {
        taxels.sort_unstable();
        let n = taxels.len() as f64;
        let (sr, sc) = taxels
            .iter()
            .fold((0.0, 0.0), |(sr, sc), &(r, c)| (sr + r as f64, sc + c as f64));
        Self {
            taxels,
            centroid: (sr / n, sc / n),
        }
    }

    pub fn area(&self) -> usize {
        self.taxels.len()
    }

    /// Smallest member in row-major order.
    pub fn min_index(&self) -> (usize, usize) {
        self.taxels[0]
    }

    pub fn max_force(&self, frame: &TaxelFrame) -> f64 {
        self.taxels
            .iter()
            .map(|&(r, c)| frame.get(r, c))
            .fold(0.0, f64::max)
    }
}

/// Marks taxels whose force strictly exceeds `tau`.
pub fn threshold_frame(frame: &TaxelFrame, tau: f64) -> BinaryMask {
    debug_assert!(tau >= 0.0);
    BinaryMask {
        rows: frame.rows,
        cols: frame.cols,
        bits: frame.forces.iter().map(|&f| f > tau).collect(),
    }
}

/// Segments the mask into connected components, largest first. Equal areas
/// are ordered by each component's smallest row-major cell.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Vec<Component> {
    let (rows, cols) = (mask.rows, mask.cols);
    let mut seen = vec![false; rows * cols];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..rows * cols {
        if !mask.bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut cells = Vec::new();
        while let Some(idx) = queue.pop_front() {
            let (r, c) = (idx / cols, idx % cols);
            cells.push((r, c));
            for (nr, nc) in neighbours(r, c, rows, cols, connectivity) {
                let n = nr * cols + nc;
                if mask.bits[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        out.push(Component::from_cells(cells));
    }

    // Seeds are visited in row-major order, so a stable sort on area alone
    // keeps equal-area components ordered by their minimum cell.
    out.sort_by(|a, b| b.area().cmp(&a.area()));
    out
}

fn neighbours(
    r: usize,
    c: usize,
    rows: usize,
    cols: usize,
    connectivity: Connectivity,
) -> impl Iterator<Item = (usize, usize)> {
    const FOUR: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
    const EIGHT: [(isize, isize); 8] = [
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, -1),
        (0, 1),
        (1, -1),
        (1, 0),
        (1, 1),
    ];
    let offsets: &'static [(isize, isize)] = match connectivity {
        Connectivity::Four => &FOUR,
        Connectivity::Eight => &EIGHT,
    };
    offsets.iter().filter_map(move |&(dr, dc)| {
        let nr = r as isize + dr;
        let nc = c as isize + dc;
        (nr >= 0 && nc >= 0 && (nr as usize) < rows && (nc as usize) < cols)
            .then_some((nr as usize, nc as usize))
    })
}

pub fn largest_component(components: &[Component]) -> Option<&Component> {
    components.first()
}

/// Resolution reduction applied to raw forces before thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pooling {
    /// Sum non-overlapping `n×n` blocks.
    Block(usize),
    /// Sum the whole grid into a single taxel.
    Full,
}

impl Pooling {
    pub fn parse(s: &str) -> Option<Pooling> {
        match s.trim() {
            "full" => Some(Pooling::Full),
            n => n.parse().ok().filter(|&n| n >= 1).map(Pooling::Block),
        }
    }
}

impl std::fmt::Display for Pooling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pooling::Block(n) => write!(f, "{n}"),
            Pooling::Full => f.write_str("full"),
        }
    }
}

/// Sums blocks of taxels into larger taxels. Total force is conserved.
///
/// A full collapse keeps the doubling ladder of the block factors: its pitch
/// is the input pitch times the shorter grid side, so a 24×16 grid at 9 mm
/// ends up as one 144 mm taxel.
pub fn pool_frame(frame: &TaxelFrame, pooling: Pooling) -> Result<TaxelFrame, TaxelError> {
    match pooling {
        Pooling::Full => {
            let side = frame.rows.min(frame.cols) as f64;
            TaxelFrame::new(1, 1, frame.pitch * side, vec![frame.total_force()])
        }
        Pooling::Block(0) => Err(TaxelError::NonDivisibleGrid {
            rows: frame.rows,
            cols: frame.cols,
            factor: 0,
        }),
        Pooling::Block(f) => {
            if !frame.rows.is_multiple_of(f) || !frame.cols.is_multiple_of(f) {
                return Err(TaxelError::NonDivisibleGrid {
                    rows: frame.rows,
                    cols: frame.cols,
                    factor: f,
                });
            }
            let (orows, ocols) = (frame.rows / f, frame.cols / f);
            let mut out = vec![0.0; orows * ocols];
            for r in 0..frame.rows {
                for c in 0..frame.cols {
                    out[(r / f) * ocols + c / f] += frame.get(r, c);
                }
            }
            TaxelFrame::new(orows, ocols, frame.pitch * f as f64, out)
        }
    }
}

/// A recorded (or simulated) contact: an ordered run of equally shaped frames.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxelTrial {
    frames: Vec<TaxelFrame>,
    sample_rate: f64,
    contact_threshold: f64,
    pub label: Option<Category>,
    pub condition: Option<Condition>,
}

impl TaxelTrial {
    pub fn new(
        frames: Vec<TaxelFrame>,
        sample_rate: f64,
        contact_threshold: f64,
        label: Option<Category>,
        condition: Option<Condition>,
    ) -> Result<Self, TaxelError> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(TaxelError::InvalidSampleRate(sample_rate));
        }
        if !(contact_threshold.is_finite() && contact_threshold >= 0.0) {
            return Err(TaxelError::InvalidThreshold(contact_threshold));
        }
        if let Some(first) = frames.first() {
            for (index, f) in frames.iter().enumerate() {
                if f.rows != first.rows || f.cols != first.cols {
                    return Err(TaxelError::FrameShapeMismatch {
                        index,
                        rows: f.rows,
                        cols: f.cols,
                        expected_rows: first.rows,
                        expected_cols: first.cols,
                    });
                }
            }
        }
        Ok(Self {
            frames,
            sample_rate,
            contact_threshold,
            label,
            condition,
        })
    }

    pub fn frames(&self) -> &[TaxelFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn contact_threshold(&self) -> f64 {
        self.contact_threshold
    }

    pub fn with_contact_threshold(mut self, tau: f64) -> Result<Self, TaxelError> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(TaxelError::InvalidThreshold(tau));
        }
        self.contact_threshold = tau;
        Ok(self)
    }

    /// Pools every frame; the trial's metadata is kept.
    pub fn pooled(&self, pooling: Pooling) -> Result<TaxelTrial, TaxelError> {
        let frames = self
            .frames
            .iter()
            .map(|f| pool_frame(f, pooling))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TaxelTrial { frames, ..self.clone_meta() })
    }

    fn clone_meta(&self) -> TaxelTrial {
        TaxelTrial {
            frames: Vec::new(),
            sample_rate: self.sample_rate,
            contact_threshold: self.contact_threshold,
            label: self.label,
            condition: self.condition,
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), TaxelError> {
        let (rows, cols) = self
            .frames
            .first()
            .map_or((DEFAULT_ROWS, DEFAULT_COLS), |f| (f.rows, f.cols));
        let (vel, stiff) = match self.condition {
            Some(c) => (Some(c.velocity), Some(c.stiffness)),
            None => (None, None),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            rows,
            cols,
            self.sample_rate,
            self.contact_threshold,
            Category::label_code(self.label),
            Setting::optional_code(vel),
            Setting::optional_code(stiff),
        )?;
        let mut line = String::new();
        for frame in &self.frames {
            line.clear();
            for (i, v) in frame.forces.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                write!(line, "{v}").expect("writing to a String");
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Reads a trial file. The file format carries no pitch, so frames use
    /// `pitch`.
    pub fn read_from<R: BufRead>(r: R, pitch: f64) -> Result<Self, TaxelError> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| TaxelError::Parse {
            line: 1,
            message: "missing header".into(),
        })??;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() != 7 {
            return Err(TaxelError::Parse {
                line: 1,
                message: format!("header has {} fields, expected 7", fields.len()),
            });
        }
        let perr = |message: String| TaxelError::Parse { line: 1, message };
        let rows: usize = fields[0].parse().map_err(|e| perr(format!("rows: {e}")))?;
        let cols: usize = fields[1].parse().map_err(|e| perr(format!("cols: {e}")))?;
        let sample_rate: f64 = fields[2].parse().map_err(|e| perr(format!("sample_rate: {e}")))?;
        let tau: f64 = fields[3]
            .parse()
            .map_err(|e| perr(format!("contact_threshold: {e}")))?;
        let label = Category::parse_label(fields[4]).map_err(|e| perr(e.to_string()))?;
        let vel = Setting::parse_optional(fields[5]).map_err(|e| perr(e.to_string()))?;
        let stiff = Setting::parse_optional(fields[6]).map_err(|e| perr(e.to_string()))?;
        let condition = match (vel, stiff) {
            (Some(v), Some(k)) => Some(Condition::new(v, k)),
            (None, None) => None,
            _ => return Err(perr("velocity and stiffness settings must both be set or both be none".into())),
        };

        let mut frames = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let forces = line
                .trim()
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| TaxelError::Parse {
                    line: lineno,
                    message: format!("force value: {e}"),
                })?;
            let frame = TaxelFrame::new(rows, cols, pitch, forces).map_err(|e| TaxelError::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            frames.push(frame);
        }
        TaxelTrial::new(frames, sample_rate, tau, label, condition)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_with(rows: usize, cols: usize, cells: &[((usize, usize), f64)]) -> TaxelFrame {
        let mut f = vec![0.0; rows * cols];
        for &((r, c), v) in cells {
            f[r * cols + c] = v;
        }
        TaxelFrame::new(rows, cols, DEFAULT_PITCH, f).unwrap()
    }

    #[test]
    fn frame_rejects_bad_input() {
        assert!(matches!(TaxelFrame::new(0, 4, 0.009, vec![]), Err(TaxelError::EmptyGrid { .. })));
        assert!(matches!(
            TaxelFrame::new(2, 2, 0.009, vec![0.0; 3]),
            Err(TaxelError::LengthMismatch { .. })
        ));
        assert!(matches!(
            TaxelFrame::new(1, 2, 0.009, vec![0.0, -1.0]),
            Err(TaxelError::InvalidForce { index: 1, .. })
        ));
        assert!(matches!(
            TaxelFrame::new(1, 1, 0.009, vec![f64::NAN]),
            Err(TaxelError::InvalidForce { .. })
        ));
    }

    #[test]
    fn threshold_zero_frame_is_empty() {
        let f = TaxelFrame::zeros(24, 16, DEFAULT_PITCH).unwrap();
        assert_eq!(threshold_frame(&f, 0.5).count(), 0);
        assert_eq!(threshold_frame(&f, 0.0).count(), 0);
    }

    #[test]
    fn threshold_single_exceedance() {
        let f = frame_with(24, 16, &[((5, 7), 1.0)]);
        let m = threshold_frame(&f, 0.5);
        assert_eq!(m.count(), 1);
        assert!(m.get(5, 7));
    }

    #[test]
    fn threshold_is_strict() {
        let f = TaxelFrame::new(24, 16, DEFAULT_PITCH, vec![0.5; 384]).unwrap();
        assert_eq!(threshold_frame(&f, 0.5).count(), 0);
    }

    #[test]
    fn components_of_empty_mask() {
        let m = BinaryMask::from_cells(4, 4, &[]).unwrap();
        assert!(connected_components(&m, Connectivity::Four).is_empty());
        assert!(largest_component(&[]).is_none());
    }

    #[test]
    fn adjacent_pair_is_one_component() {
        let m = BinaryMask::from_cells(4, 4, &[(0, 0), (0, 1)]).unwrap();
        let cc = connected_components(&m, Connectivity::Four);
        assert_eq!(cc.len(), 1);
        assert_eq!(cc[0].area(), 2);
        assert_eq!(cc[0].centroid, (0.0, 0.5));
    }

    #[test]
    fn five_bit_pattern_splits_in_two() {
        // Frozen from a hand flood fill: {(0,0),(0,1)} and {(2,2),(2,3),(3,3)}.
        let m = BinaryMask::from_cells(4, 4, &[(0, 0), (0, 1), (2, 2), (2, 3), (3, 3)]).unwrap();
        let cc = connected_components(&m, Connectivity::Four);
        let areas: Vec<_> = cc.iter().map(Component::area).collect();
        assert_eq!(areas, vec![3, 2]);
        assert_eq!(cc[0].taxels, vec![(2, 2), (2, 3), (3, 3)]);
    }

    #[test]
    fn diagonal_cells_depend_on_connectivity() {
        let m = BinaryMask::from_cells(3, 3, &[(0, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(connected_components(&m, Connectivity::Four).len(), 3);
        let eight = connected_components(&m, Connectivity::Eight);
        assert_eq!(eight.len(), 1);
        assert_eq!(eight[0].centroid, (1.0, 1.0));
    }

    #[test]
    fn equal_areas_tie_break_on_min_index() {
        let m = BinaryMask::from_cells(5, 5, &[(3, 0), (4, 0), (0, 3), (0, 4)]).unwrap();
        let cc = connected_components(&m, Connectivity::Four);
        assert_eq!(cc.len(), 2);
        assert_eq!(cc[0].min_index(), (0, 3));
        assert_eq!(largest_component(&cc).unwrap().min_index(), (0, 3));
    }

    #[test]
    fn largest_prefers_bigger_area() {
        let m = BinaryMask::from_cells(6, 6, &[(0, 0), (0, 1), (3, 0), (3, 1), (3, 2), (4, 0), (4, 1)]).unwrap();
        let cc = connected_components(&m, Connectivity::Four);
        assert_eq!(largest_component(&cc).unwrap().area(), 5);
    }

    #[test]
    fn pooling_uniform_grid() {
        let f = TaxelFrame::new(24, 16, DEFAULT_PITCH, vec![1.0; 384]).unwrap();
        let p = pool_frame(&f, Pooling::Block(2)).unwrap();
        assert_eq!((p.rows(), p.cols()), (12, 8));
        assert!(p.forces().iter().all(|&v| v == 4.0));
        assert!((p.pitch() - 0.018).abs() < 1e-15);
    }

    #[test]
    fn pooling_rejects_non_divisible() {
        let f = TaxelFrame::zeros(24, 16, DEFAULT_PITCH).unwrap();
        assert!(matches!(
            pool_frame(&f, Pooling::Block(5)),
            Err(TaxelError::NonDivisibleGrid { factor: 5, .. })
        ));
        assert!(pool_frame(&f, Pooling::Block(0)).is_err());
    }

    #[test]
    fn resolution_ladder() {
        let f = TaxelFrame::zeros(24, 16, DEFAULT_PITCH).unwrap();
        let ladder = [
            (Pooling::Block(1), 384, 1.235),
            (Pooling::Block(2), 96, 0.309),
            (Pooling::Block(4), 24, 0.077),
            (Pooling::Block(8), 6, 0.019),
            (Pooling::Full, 1, 0.005),
        ];
        for (pool, taxels, density) in ladder {
            let p = pool_frame(&f, pool).unwrap();
            assert_eq!(p.rows() * p.cols(), taxels, "{pool}");
            let rounded = (p.taxels_per_cm2() * 1000.0).round() / 1000.0;
            assert_eq!(rounded, density, "{pool}");
        }
    }

    #[test]
    fn trial_file_round_trip() {
        let frames = vec![
            frame_with(2, 3, &[((0, 1), 0.1), ((1, 2), 1.0 / 3.0)]),
            frame_with(2, 3, &[((1, 1), 12.5)]),
        ];
        let trial = TaxelTrial::new(
            frames,
            100.0,
            0.5,
            Some(Category::SoftMovable),
            Some(Condition::new(Setting::Low, Setting::High)),
        )
        .unwrap();
        let mut buf = Vec::new();
        trial.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("2,3,100,0.5,SM,low,high\n"));
        assert_eq!(text.lines().nth(2).unwrap(), "0,0,0,0,12.5,0");
        let back = TaxelTrial::read_from(buf.as_slice(), DEFAULT_PITCH).unwrap();
        assert_eq!(back, trial);
    }

    #[test]
    fn trial_reader_reports_line() {
        let text = "2,2,100,0.5,RF,none,none\n0,0,0,0\n0,x,0,0\n";
        match TaxelTrial::read_from(text.as_bytes(), DEFAULT_PITCH) {
            Err(TaxelError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad_label = "2,2,100,0.5,XX,none,none\n";
        assert!(TaxelTrial::read_from(bad_label.as_bytes(), DEFAULT_PITCH).is_err());
    }
}
