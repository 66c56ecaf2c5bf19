use super::GeometryError;

/// One frame of segmentation: a `width × height` grid of 0/1 pixels, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl BinaryMask {
    /// All-zero mask.
    pub fn new(width: usize, height: usize) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            pixels: vec![0; width * height],
        })
    }

    /// Builds a mask from row-major bytes, each of which must be 0 or 1.
    pub fn from_vec(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(GeometryError::InvalidDimensions { width, height });
        }
        if let Some(index) = pixels.iter().position(|&v| v > 1) {
            return Err(GeometryError::InvalidPixel {
                index,
                value: pixels[index],
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds a mask by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, GeometryError> {
        let mut mask = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    mask.pixels[y * width + x] = 1;
                }
            }
        }
        Ok(mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.pixels[y * self.width + x] == 1
    }

    /// Signed lookup; anything outside the grid reads as background.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && self.get(x as usize, y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) outside mask");
        self.pixels[y * self.width + x] = u8::from(value);
    }

    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|&&v| v == 1).count()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.iter().all(|&v| v == 0)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Foreground pixel count of the intersection with `other`.
    pub fn intersection_count(&self, other: &Self) -> usize {
        self.pixels
            .iter()
            .zip(&other.pixels)
            .filter(|(&a, &b)| a == 1 && b == 1)
            .count()
    }

    /// Labels 8-connected foreground components in raster order of their first pixel.
    pub fn components(&self) -> Components {
        let (w, h) = (self.width, self.height);
        let mut labels = vec![0u32; w * h];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..w * h {
            if self.pixels[start] == 0 || labels[start] != 0 {
                continue;
            }
            sizes.push(0usize);
            let label = sizes.len() as u32;
            labels[start] = label;
            stack.push(start);
            while let Some(idx) = stack.pop() {
                sizes[label as usize - 1] += 1;
                let (x, y) = ((idx % w) as i64, (idx / w) as i64);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let n = ny as usize * w + nx as usize;
                        if self.pixels[n] == 1 && labels[n] == 0 {
                            labels[n] = label;
                            stack.push(n);
                        }
                    }
                }
            }
        }
        Components {
            width: w,
            height: h,
            labels,
            sizes,
        }
    }

    /// Mask holding only the largest 8-connected component.
    /// Equal-size components resolve to the one met first in raster order.
    pub fn largest_component(&self) -> Self {
        let comps = self.components();
        match comps.largest() {
            Some(label) => comps.mask_of(label),
            None => self.clone(),
        }
    }

    /// Centroid of all foreground pixels (pixel-center coordinates).
    pub fn centroid(&self) -> Option<super::Point2D> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    sx += x as f64;
                    sy += y as f64;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| super::Point2D::new(sx / n as f64, sy / n as f64))
    }
}

/// Result of 8-connected labelling. Label 0 is background; labels start at 1.
#[derive(Debug, Clone)]
pub struct Components {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl Components {
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn size(&self, label: u32) -> usize {
        self.sizes[label as usize - 1]
    }

    pub fn largest(&self) -> Option<u32> {
        let mut best: Option<(u32, usize)> = None;
        for (i, &s) in self.sizes.iter().enumerate() {
            if best.is_none_or(|(_, bs)| s > bs) {
                best = Some((i as u32 + 1, s));
            }
        }
        best.map(|(l, _)| l)
    }

    pub fn mask_of(&self, label: u32) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            pixels: self.labels.iter().map(|&l| u8::from(l == label)).collect(),
        }
    }
}

/// Pixel count of the largest 8-connected foreground component; 0 for an empty mask.
pub fn mask_area(mask: &BinaryMask) -> f64 {
    let comps = mask.components();
    comps.largest().map_or(0.0, |l| comps.size(l) as f64)
}
