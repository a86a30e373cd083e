//! Connected-component labeling of binary images by horizontal runs.
//!
//! Each row is split into runs of set pixels; runs in adjacent rows that
//! touch (overlap, or also touch diagonally under 8-connectivity) are merged
//! with a union-find. Only bounding boxes and pixel counts are kept.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

/// Bounding box `[x0,x1) x [y0,y1)` and pixel count of one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Blob {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub area: usize,
}

impl Blob {
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }
}

#[derive(Clone, Copy)]
struct Run {
    y: usize,
    x0: usize,
    x1: usize,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

/// Labels the nonzero pixels of a row-major `width x height` mask.
/// Blobs come out in order of their first run (top to bottom, left to right).
pub fn label(mask: &[u8], width: usize, height: usize, conn: Connectivity) -> Vec<Blob> {
    assert_eq!(mask.len(), width * height, "mask size");
    let reach = match conn {
        Connectivity::Four => 0,
        Connectivity::Eight => 1,
    };
    let mut runs: Vec<Run> = Vec::new();
    let mut parent: Vec<usize> = Vec::new();
    let mut prev_row = 0..0;
    for y in 0..height {
        let row = &mask[y * width..(y + 1) * width];
        let start = runs.len();
        let mut x = 0;
        while x < width {
            if row[x] == 0 {
                x += 1;
                continue;
            }
            let x0 = x;
            while x < width && row[x] != 0 {
                x += 1;
            }
            let id = runs.len();
            runs.push(Run { y, x0, x1: x });
            parent.push(id);
            // runs in the previous row are sorted by x
            for j in prev_row.clone() {
                let p = runs[j];
                if p.x0 >= x + reach {
                    break;
                }
                if p.x1 + reach > x0 {
                    union(&mut parent, id, j);
                }
            }
        }
        prev_row = start..runs.len();
    }

    let mut index_of_root = vec![usize::MAX; runs.len()];
    let mut blobs: Vec<Blob> = Vec::new();
    for (i, &run) in runs.iter().enumerate() {
        let r = find(&mut parent, i);
        let slot = if index_of_root[r] == usize::MAX {
            index_of_root[r] = blobs.len();
            blobs.push(Blob {
                x0: run.x0,
                y0: run.y,
                x1: run.x1,
                y1: run.y + 1,
                area: 0,
            });
            blobs.len() - 1
        } else {
            index_of_root[r]
        };
        let b = &mut blobs[slot];
        b.x0 = b.x0.min(run.x0);
        b.x1 = b.x1.max(run.x1);
        b.y0 = b.y0.min(run.y);
        b.y1 = b.y1.max(run.y + 1);
        b.area += run.x1 - run.x0;
    }
    blobs
}
