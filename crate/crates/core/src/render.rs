//! Raster output: binary PPM (P6) with one colored square per cell.

use thiserror::Error;

use crate::config::{BBox, Cell, Configuration};
use crate::state::State;

pub type Rgb = [u8; 3];

/// State colors: 0 white, 1 blue, 2 red, 3 green, 4 yellow.
pub const PALETTE: [Rgb; 5] = [[255, 255, 255], [0, 0, 255], [255, 0, 0], [0, 255, 0], [255, 255, 0]];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("state {0} has no color")]
    Uncolored(State),
    #[error("cell size must be at least 1")]
    ZeroCellSize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderSpec {
    pub cell_size: u32,
    /// Color of state `s` at index `s`.
    pub colors: Vec<Rgb>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec { cell_size: 1, colors: PALETTE.to_vec() }
    }
}

impl RenderSpec {
    pub fn with_cell_size(cell_size: u32) -> Self {
        RenderSpec { cell_size, ..Self::default() }
    }

    fn color(&self, s: State) -> Result<Rgb, RenderError> {
        usize::try_from(s).ok().and_then(|i| self.colors.get(i)).copied().ok_or(RenderError::Uncolored(s))
    }
}

/// `frame` as a P6 image, top row first.
pub fn render_ppm(grid: &Configuration, frame: BBox, spec: &RenderSpec) -> Result<Vec<u8>, RenderError> {
    if spec.cell_size == 0 {
        return Err(RenderError::ZeroCellSize);
    }
    let k = spec.cell_size as usize;
    let (w, h) = (frame.width() as usize * k, frame.height() as usize * k);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h * 3);
    for y in (frame.min_y..=frame.max_y).rev() {
        let mut row = Vec::with_capacity(w * 3);
        for x in frame.min_x..=frame.max_x {
            let rgb = spec.color(grid.get(Cell::new(x, y)))?;
            for _ in 0..k {
                row.extend_from_slice(&rgb);
            }
        }
        for _ in 0..k {
            out.extend_from_slice(&row);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pixels(ppm: &[u8]) -> (&str, &[u8]) {
        let header_end = ppm.iter().enumerate().filter(|(_, &b)| b == b'\n').nth(2).unwrap().0 + 1;
        (std::str::from_utf8(&ppm[..header_end]).unwrap(), &ppm[header_end..])
    }

    #[test]
    fn single_red_pixel() {
        let grid = Configuration::from_cells(0, [(Cell::new(0, 0), 2)]);
        let ppm = render_ppm(&grid, grid.bbox().unwrap(), &RenderSpec::default()).unwrap();
        assert_eq!(pixels(&ppm), ("P6\n1 1\n255\n", &[255u8, 0, 0][..]));
    }

    #[test]
    fn empty_frame_is_white() {
        let frame = BBox { min_x: 0, min_y: 0, max_x: 2, max_y: 1 };
        let ppm = render_ppm(&Configuration::new(0), frame, &RenderSpec::with_cell_size(2)).unwrap();
        let (header, body) = pixels(&ppm);
        assert_eq!(header, "P6\n6 4\n255\n");
        assert!(body.len() == 6 * 4 * 3 && body.iter().all(|&b| b == 255));
    }

    #[test]
    fn rows_run_top_down() {
        let grid = Configuration::from_cells(0, [(Cell::new(0, 1), 1), (Cell::new(0, 0), 4)]);
        let ppm = render_ppm(&grid, grid.bbox().unwrap(), &RenderSpec::default()).unwrap();
        assert_eq!(pixels(&ppm).1, &[0, 0, 255, 255, 255, 0]);
    }

    #[test]
    fn states_outside_the_palette_fail() {
        let grid = Configuration::from_cells(0, [(Cell::new(0, 0), 5)]);
        assert_eq!(render_ppm(&grid, grid.bbox().unwrap(), &RenderSpec::default()), Err(RenderError::Uncolored(5)));
    }
}
