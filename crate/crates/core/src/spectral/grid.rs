use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Densification policy for [`FrequencyGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Half-width of the region covered around every resonance, in linewidths.
    pub span_linewidths: f64,
    /// Minimum sampling density inside the core region.
    pub points_per_linewidth: f64,
    /// Half-width of the uniformly sampled core, in linewidths.
    pub core_linewidths: f64,
    /// Outside the core, each step is this fraction of the distance to the center.
    pub growth: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            span_linewidths: 50.0,
            points_per_linewidth: 20.0,
            core_linewidths: 5.0,
            growth: 0.02,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.span_linewidths >= self.core_linewidths
            && self.core_linewidths > 0.0
            && self.points_per_linewidth >= 1.0
            && self.growth > 0.0
            && self.growth < 1.0;
        if !ok {
            return Err(Error::invalid(
                "grid",
                "need span ≥ core > 0, points_per_linewidth ≥ 1 and 0 < growth < 1",
            ));
        }
        Ok(())
    }
}

/// A resonance the grid is densified around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub center: f64,
    /// Full width at half maximum, rad/s.
    pub linewidth: f64,
}

/// Sorted angular frequencies, dense around each anchor and geometrically
/// sparser in between.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
    anchors: Vec<Anchor>,
    config: GridConfig,
}

impl FrequencyGrid {
    pub fn around(anchors: &[Anchor], config: &GridConfig) -> Result<Self> {
        config.validate()?;
        if anchors.is_empty() {
            return Err(Error::Grid("at least one anchor is required".into()));
        }
        for a in anchors {
            if !(a.linewidth > 0.0) || !a.linewidth.is_finite() || !a.center.is_finite() {
                return Err(Error::Grid(format!(
                    "anchor at {} rad/s has non-positive linewidth {}",
                    a.center, a.linewidth
                )));
            }
            if a.linewidth < 1e-13 * a.center.abs() {
                return Err(Error::Grid(format!(
                    "linewidth {} at {} rad/s is below floating-point resolution",
                    a.linewidth, a.center
                )));
            }
        }
        let span = config.span_linewidths;
        let lo = anchors
            .iter()
            .map(|a| a.center - span * a.linewidth)
            .fold(f64::INFINITY, f64::min);
        let hi = anchors
            .iter()
            .map(|a| a.center + span * a.linewidth)
            .fold(f64::NEG_INFINITY, f64::max);

        let mut points = vec![lo, hi];
        for a in anchors {
            let h = a.linewidth / config.points_per_linewidth;
            // one extra step so the interval straddling the core edge is dense too
            let core_steps =
                (config.core_linewidths * config.points_per_linewidth).ceil() as i64 + 1;
            for k in -core_steps..=core_steps {
                points.push(a.center + k as f64 * h);
            }
            let mut d = core_steps as f64 * h;
            let reach = (a.center - lo).max(hi - a.center);
            while d < reach {
                d += (config.growth * d).max(h);
                points.push(a.center - d);
                points.push(a.center + d);
            }
        }
        points.retain(|&p| p >= lo && p <= hi);
        points.sort_by(f64::total_cmp);

        let min_width = anchors
            .iter()
            .map(|a| a.linewidth)
            .fold(f64::INFINITY, f64::min);
        let tol = min_width / config.points_per_linewidth * 1e-6;
        points.dedup_by(|b, a| (*b - *a).abs() <= tol);

        let grid = Self {
            points,
            anchors: anchors.to_vec(),
            config: *config,
        };
        grid.check_covers(anchors)?;
        Ok(grid)
    }

    /// Wrap explicit points; only monotonicity is checked.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        check_increasing(&points)?;
        Ok(Self {
            points,
            anchors: Vec::new(),
            config: GridConfig::default(),
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same grid with a midpoint inserted in every interval.
    pub fn refined(&self) -> Self {
        let mut points = Vec::with_capacity(2 * self.points.len());
        for w in self.points.windows(2) {
            points.push(w[0]);
            points.push(0.5 * (w[0] + w[1]));
        }
        points.extend(self.points.last());
        Self {
            points,
            anchors: self.anchors.clone(),
            config: self.config,
        }
    }

    /// Checks the span and core-density invariants for each anchor.
    pub fn check_covers(&self, anchors: &[Anchor]) -> Result<()> {
        check_increasing(&self.points)?;
        let (first, last) = (self.points[0], self.points[self.points.len() - 1]);
        let span = self.config.span_linewidths;
        let ppl = self.config.points_per_linewidth;
        for a in anchors {
            let need_lo = a.center - span * a.linewidth;
            let need_hi = a.center + span * a.linewidth;
            let slack = 1e-9 * a.linewidth;
            if first > need_lo + slack || last < need_hi - slack {
                return Err(Error::Grid(format!(
                    "grid [{first:e}, {last:e}] does not cover {span} linewidths around {:e}",
                    a.center
                )));
            }
            let core_lo = a.center - self.config.core_linewidths * a.linewidth;
            let core_hi = a.center + self.config.core_linewidths * a.linewidth;
            let max_step = a.linewidth / ppl * (1.0 + 1e-6);
            let start = self
                .points
                .partition_point(|&p| p < core_lo)
                .saturating_sub(1);
            let end = self
                .points
                .partition_point(|&p| p <= core_hi)
                .min(self.points.len() - 1);
            for i in start..end {
                if self.points[i + 1] - self.points[i] > max_step {
                    return Err(Error::Grid(format!(
                        "fewer than {ppl} points per linewidth near {:e} rad/s",
                        a.center
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_increasing(points: &[f64]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::Grid("need at least three points".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Grid("non-finite frequency".into()));
    }
    if points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid(
            "frequencies must be strictly increasing".into(),
        ));
    }
    Ok(())
}
