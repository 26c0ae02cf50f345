use super::{RasterError, Result};

/// Row-major 2-D raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Copy> Plane<T> {
    pub fn new(width: usize, height: usize, fill: T) -> Self {
        Self {
            width,
            height,
            data: vec![fill; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(RasterError::HeaderInvalid(format!(
                "plane buffer holds {} samples, {}x{} requires {}",
                data.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    #[inline]
    pub fn row_mut(&mut self, y: usize) -> &mut [T] {
        &mut self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.width.max(1))
    }

    pub fn rows_mut(&mut self) -> std::slice::ChunksExactMut<'_, T> {
        self.data.chunks_exact_mut(self.width.max(1))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Plane<U> {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Copies the `w`×`h` window whose top-left corner is `(x0, y0)`.
    pub fn window(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Plane<T>> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(RasterError::OutOfBounds(format!(
                "window {w}x{h} at ({x0},{y0}) in {}x{} plane",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.row(y)[x0..x0 + w]);
        }
        Ok(Plane {
            width: w,
            height: h,
            data,
        })
    }
}

impl<T: Copy + Into<f64>> Plane<T> {
    pub fn to_f64(&self) -> Plane<f64> {
        self.map(|v| v.into())
    }

    /// Mean over the listed rows, per column.
    pub fn column_means(&self, rows: &[usize]) -> Vec<f64> {
        let mut acc = vec![0.0; self.width];
        for &y in rows {
            for (a, &v) in acc.iter_mut().zip(self.row(y)) {
                *a += v.into();
            }
        }
        let n = rows.len().max(1) as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}
