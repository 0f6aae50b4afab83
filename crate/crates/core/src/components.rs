//! Connected-component labeling and shape-based pruning of candidate zeros.

use crate::image::BinaryImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    pub fn from_number(n: u32) -> Option<Self> {
        match n {
            4 => Some(Connectivity::Four),
            8 => Some(Connectivity::Eight),
            _ => None,
        }
    }

    pub fn as_number(self) -> u32 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl BBox {
    pub fn width(&self) -> usize {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> usize {
        self.max_y - self.min_y + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x as f64 && x <= self.max_x as f64 && y >= self.min_y as f64 && y <= self.max_y as f64
    }
}

/// One labeled foreground region with its statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub label: u32,
    pub area: usize,
    pub bbox: BBox,
    /// Gravity center `(x, y)`.
    pub centroid: (f64, f64),
    pixels: Vec<(u32, u32)>,
}

impl Component {
    fn from_pixels(label: u32, pixels: Vec<(u32, u32)>) -> Self {
        let area = pixels.len();
        let (mut sx, mut sy) = (0u64, 0u64);
        let mut bbox = BBox { min_x: usize::MAX, min_y: usize::MAX, max_x: 0, max_y: 0 };
        for &(x, y) in &pixels {
            let (x, y) = (x as usize, y as usize);
            sx += x as u64;
            sy += y as u64;
            bbox.min_x = bbox.min_x.min(x);
            bbox.min_y = bbox.min_y.min(y);
            bbox.max_x = bbox.max_x.max(x);
            bbox.max_y = bbox.max_y.max(y);
        }
        let centroid = (sx as f64 / area as f64, sy as f64 / area as f64);
        Self { label, area, bbox, centroid, pixels }
    }

    /// Member pixel coordinates in row-major order.
    pub fn pixels(&self) -> &[(u32, u32)] {
        &self.pixels
    }

    /// Longer bbox side over shorter bbox side.
    pub fn aspect_ratio(&self) -> f64 {
        let (w, h) = (self.bbox.width() as f64, self.bbox.height() as f64);
        w.max(h) / w.min(h)
    }

    /// Foreground pixels over bbox area.
    pub fn fill_ratio(&self) -> f64 {
        self.area as f64 / self.bbox.area() as f64
    }
}

/// Label raster plus per-component statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSet {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    components: Vec<Component>,
}

impl ComponentSet {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major label raster, 0 for background.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn get(&self, label: u32) -> Option<&Component> {
        self.components.binary_search_by_key(&label, |c| c.label).ok().map(|i| &self.components[i])
    }

    /// Keeps components satisfying `keep`, clearing the others from the raster.
    pub fn retain(&self, mut keep: impl FnMut(&Component) -> bool) -> ComponentSet {
        let mut labels = self.labels.clone();
        let mut components = Vec::with_capacity(self.components.len());
        for c in &self.components {
            if keep(c) {
                components.push(c.clone());
            } else {
                for &(x, y) in &c.pixels {
                    labels[y as usize * self.width + x as usize] = 0;
                }
            }
        }
        ComponentSet { width: self.width, height: self.height, labels, components }
    }

    pub fn to_binary(&self) -> BinaryImage {
        let pixels = self.labels.iter().map(|&l| l != 0).collect();
        BinaryImage::new(self.width, self.height, pixels).expect("same dimensions")
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass union-find labeling. Labels run 1..=N in order of each
/// component's first pixel in row-major order.
pub fn label_components(img: &BinaryImage, connectivity: Connectivity) -> ComponentSet {
    let (w, h) = (img.width(), img.height());
    let mut provisional = vec![0u32; w * h];
    let mut sets = DisjointSet { parent: vec![0] };

    // Previously visited neighbours: W, NW, N, NE (diagonals only for 8-connectivity).
    let neighbours: &[(isize, isize)] = match connectivity {
        Connectivity::Four => &[(-1, 0), (0, -1)],
        Connectivity::Eight => &[(-1, 0), (-1, -1), (0, -1), (1, -1)],
    };

    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                continue;
            }
            let mut current = 0u32;
            for &(dx, dy) in neighbours {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize {
                    continue;
                }
                let l = provisional[ny as usize * w + nx as usize];
                if l == 0 {
                    continue;
                }
                if current == 0 {
                    current = l;
                } else {
                    sets.union(current, l);
                }
            }
            if current == 0 {
                current = sets.parent.len() as u32;
                sets.parent.push(current);
            }
            provisional[y * w + x] = current;
        }
    }

    let mut final_label = vec![0u32; sets.parent.len()];
    let mut next = 0u32;
    let mut pixels: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut labels = vec![0u32; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = provisional[y * w + x];
            if p == 0 {
                continue;
            }
            let root = sets.find(p);
            if final_label[root as usize] == 0 {
                next += 1;
                final_label[root as usize] = next;
                pixels.push(Vec::new());
            }
            let l = final_label[root as usize];
            labels[y * w + x] = l;
            pixels[l as usize - 1].push((x as u32, y as u32));
        }
    }

    let components = pixels.into_iter().enumerate().map(|(i, px)| Component::from_pixels(i as u32 + 1, px)).collect();
    ComponentSet { width: w, height: h, labels, components }
}

/// Drops components that cannot be a zero glyph: bbox side ratio above 2,
/// or bbox area more than twice the pixel count.
pub fn filter_by_shape(set: &ComponentSet) -> ComponentSet {
    set.retain(|c| c.aspect_ratio() <= 2.0 && c.bbox.area() <= 2 * c.area)
}

/// Keeps components whose area lies in `min_area..=max_area`.
pub fn filter_by_area(set: &ComponentSet, min_area: usize, max_area: usize) -> ComponentSet {
    set.retain(|c| (min_area..=max_area).contains(&c.area))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(w: usize, h: usize, rects: &[(usize, usize, usize, usize)]) -> BinaryImage {
        BinaryImage::from_fn(w, h, |x, y| {
            rects.iter().any(|&(x0, y0, rw, rh)| x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh)
        })
    }

    #[test]
    fn two_corner_pixels() {
        let mut img = BinaryImage::filled(5, 5, false);
        img.set(0, 0, true);
        img.set(4, 4, true);
        let set = label_components(&img, Connectivity::Eight);
        assert_eq!(set.len(), 2);
        assert_eq!(set.components()[0].area, 1);
        assert_eq!(set.components()[1].area, 1);
        assert_eq!(set.label_at(0, 0), 1);
        assert_eq!(set.label_at(4, 4), 2);
    }

    #[test]
    fn diagonal_pair_depends_on_connectivity() {
        let mut img = BinaryImage::filled(4, 4, false);
        img.set(1, 1, true);
        img.set(2, 2, true);
        assert_eq!(label_components(&img, Connectivity::Eight).len(), 1);
        assert_eq!(label_components(&img, Connectivity::Four).len(), 2);
    }

    #[test]
    fn empty_image() {
        let set = label_components(&BinaryImage::filled(6, 3, false), Connectivity::Eight);
        assert!(set.is_empty());
    }

    #[test]
    fn u_shape_merges_late() {
        let img = BinaryImage::from_ascii(&["#...#", "#...#", "#####"]);
        let set = label_components(&img, Connectivity::Four);
        assert_eq!(set.len(), 1);
        assert_eq!(set.components()[0].area, 9);
    }

    #[test]
    fn shape_rules() {
        let img = block(60, 40, &[(2, 2, 30, 10), (40, 20, 10, 10)]);
        let set = label_components(&img, Connectivity::Eight);
        let kept = filter_by_shape(&set);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept.components()[0].bbox.width(), 10);
        assert_eq!(kept.label_at(5, 5), 0);
        assert_eq!(kept.label_at(45, 25), 2);
    }

    #[test]
    fn sparse_component_is_pruned() {
        // 14×12 bbox outlined by 40 pixels: 168 / 40 = 4.2 > 2.
        let mut img = BinaryImage::filled(20, 20, false);
        let mut n = 0;
        for x in 0..14 {
            img.set(x + 2, 2, true);
            img.set(x + 2, 13, true);
            n += 2;
        }
        for y in 3..9 {
            img.set(2, y, true);
            n += 1;
        }
        for y in 9..13 {
            img.set(2, y, true);
            n += 1;
        }
        assert_eq!(n, 38);
        img.set(15, 3, true);
        img.set(15, 12, true);
        let set = label_components(&img, Connectivity::Eight);
        let c = &set.components()[0];
        assert_eq!((c.bbox.width(), c.bbox.height(), c.area), (14, 12, 40));
        assert!(filter_by_shape(&set).is_empty());
    }

    #[test]
    fn area_filter() {
        let img = block(30, 30, &[(0, 0, 2, 2), (10, 10, 5, 5), (20, 0, 10, 10)]);
        let set = label_components(&img, Connectivity::Eight);
        let kept = filter_by_area(&set, 5, 50);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept.components()[0].area, 25);
    }
}
