//! Periodic L×L square lattice with qubits on edges.
//!
//! Coordinates: vertex (star) `(r, c)` sits at `x = c, y = r`; plaquette
//! `(r, c)` is the unit square whose lower-left corner is vertex `(r, c)`.
//!
//! * horizontal edge `h(r, c)` joins vertex `(r, c)` to `(r, c+1)` and is the
//!   bottom side of plaquette `(r, c)` (top side of `(r-1, c)`);
//! * vertical edge `v(r, c)` joins vertex `(r, c)` to `(r+1, c)` and is the
//!   left side of plaquette `(r, c)` (right side of `(r, c-1)`).
//!
//! Edge ids are `orientation * L² + r * L + c`, plaquette and star ids are
//! `r * L + c`. All incidence is arithmetic.
//!
//! Bit-flip chains are measured by plaquettes, so a closed chain is a cycle on
//! the plaquette (dual) lattice. Its winding is read off by intersecting it with
//! a non-contractible cycle of the primal lattice: the horizontal edges of row 0
//! detect vertical winding, the vertical edges of column 0 detect horizontal
//! winding.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Direction of a non-contractible cycle on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeCoord {
    pub orientation: Orientation,
    pub row: usize,
    pub col: usize,
}

/// Result of an [`ToricLattice::incidence`] query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Incidence {
    /// Boundary edges of a plaquette or star.
    Edges([usize; 4]),
    /// The two plaquettes and two stars touching an edge.
    Edge {
        plaquettes: [usize; 2],
        stars: [usize; 2],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    Plaquette,
    Star,
    Edge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ToricLattice {
    size: usize,
}

impl ToricLattice {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidSize(size));
        }
        Ok(Self { size })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        2 * self.size * self.size
    }

    #[inline]
    pub fn num_plaquettes(&self) -> usize {
        self.size * self.size
    }

    #[inline]
    pub fn num_stars(&self) -> usize {
        self.size * self.size
    }

    #[inline]
    fn wrap(&self, x: usize, delta: isize) -> usize {
        let l = self.size as isize;
        (((x as isize + delta) % l + l) % l) as usize
    }

    #[inline]
    pub fn edge_id(&self, orientation: Orientation, row: usize, col: usize) -> usize {
        let l = self.size;
        let o = match orientation {
            Orientation::Horizontal => 0,
            Orientation::Vertical => 1,
        };
        o * l * l + (row % l) * l + col % l
    }

    #[inline]
    pub fn edge_coord(&self, edge: usize) -> EdgeCoord {
        let l2 = self.size * self.size;
        let orientation = if edge < l2 {
            Orientation::Horizontal
        } else {
            Orientation::Vertical
        };
        let rc = edge % l2;
        EdgeCoord {
            orientation,
            row: rc / self.size,
            col: rc % self.size,
        }
    }

    #[inline]
    pub fn cell_id(&self, row: usize, col: usize) -> usize {
        (row % self.size) * self.size + col % self.size
    }

    #[inline]
    pub fn cell_coord(&self, id: usize) -> (usize, usize) {
        (id / self.size, id % self.size)
    }

    /// The two plaquettes separated by `edge`. For a horizontal edge the first
    /// is the one below; for a vertical edge the first is the one to the left.
    #[inline]
    pub fn edge_plaquettes(&self, edge: usize) -> [usize; 2] {
        let EdgeCoord {
            orientation,
            row,
            col,
        } = self.edge_coord(edge);
        match orientation {
            Orientation::Horizontal => [
                self.cell_id(self.wrap(row, -1), col),
                self.cell_id(row, col),
            ],
            Orientation::Vertical => [
                self.cell_id(row, self.wrap(col, -1)),
                self.cell_id(row, col),
            ],
        }
    }

    /// The two endpoints (stars) of `edge`, in the positive direction.
    #[inline]
    pub fn edge_stars(&self, edge: usize) -> [usize; 2] {
        let EdgeCoord {
            orientation,
            row,
            col,
        } = self.edge_coord(edge);
        match orientation {
            Orientation::Horizontal => [
                self.cell_id(row, col),
                self.cell_id(row, self.wrap(col, 1)),
            ],
            Orientation::Vertical => [
                self.cell_id(row, col),
                self.cell_id(self.wrap(row, 1), col),
            ],
        }
    }

    /// Bottom, top, left, right.
    #[inline]
    pub fn plaquette_edges(&self, plaquette: usize) -> [usize; 4] {
        let (r, c) = self.cell_coord(plaquette);
        [
            self.edge_id(Orientation::Horizontal, r, c),
            self.edge_id(Orientation::Horizontal, self.wrap(r, 1), c),
            self.edge_id(Orientation::Vertical, r, c),
            self.edge_id(Orientation::Vertical, r, self.wrap(c, 1)),
        ]
    }

    /// Right, left, up, down.
    #[inline]
    pub fn star_edges(&self, star: usize) -> [usize; 4] {
        let (r, c) = self.cell_coord(star);
        [
            self.edge_id(Orientation::Horizontal, r, c),
            self.edge_id(Orientation::Horizontal, r, self.wrap(c, -1)),
            self.edge_id(Orientation::Vertical, r, c),
            self.edge_id(Orientation::Vertical, self.wrap(r, -1), c),
        ]
    }

    /// Plaquettes sharing an edge with `plaquette`, paired with that edge:
    /// below, above, left, right.
    #[inline]
    pub fn plaquette_neighbors(&self, plaquette: usize) -> [(usize, usize); 4] {
        let (r, c) = self.cell_coord(plaquette);
        let [bottom, top, left, right] = self.plaquette_edges(plaquette);
        [
            (self.cell_id(self.wrap(r, -1), c), bottom),
            (self.cell_id(self.wrap(r, 1), c), top),
            (self.cell_id(r, self.wrap(c, -1)), left),
            (self.cell_id(r, self.wrap(c, 1)), right),
        ]
    }

    pub fn incidence(&self, element: Element, id: usize) -> Result<Incidence> {
        let limit = match element {
            Element::Plaquette => self.num_plaquettes(),
            Element::Star => self.num_stars(),
            Element::Edge => self.num_edges(),
        };
        if id >= limit {
            let kind = match element {
                Element::Plaquette => "plaquette",
                Element::Star => "star",
                Element::Edge => "edge",
            };
            return Err(Error::IndexOutOfRange {
                kind,
                index: id,
                limit,
            });
        }
        Ok(match element {
            Element::Plaquette => Incidence::Edges(self.plaquette_edges(id)),
            Element::Star => Incidence::Edges(self.star_edges(id)),
            Element::Edge => Incidence::Edge {
                plaquettes: self.edge_plaquettes(id),
                stars: self.edge_stars(id),
            },
        })
    }

    /// Edges whose crossing parity with a closed plaquette-lattice chain gives
    /// that chain's winding along `axis`.
    pub fn test_line(&self, axis: Axis) -> Vec<usize> {
        (0..self.size)
            .map(|i| match axis {
                Axis::Vertical => self.edge_id(Orientation::Horizontal, 0, i),
                Axis::Horizontal => self.edge_id(Orientation::Vertical, i, 0),
            })
            .collect()
    }

    /// Test-line membership packed as bits: vertical winding in bit 0,
    /// horizontal winding in bit 1.
    #[inline]
    pub fn crossing_bits(&self, edge: usize) -> u8 {
        self.on_test_line(Axis::Vertical, edge) as u8
            | (self.on_test_line(Axis::Horizontal, edge) as u8) << 1
    }

    /// Membership test for [`Self::test_line`] without allocating.
    #[inline]
    pub fn on_test_line(&self, axis: Axis, edge: usize) -> bool {
        let EdgeCoord {
            orientation,
            row,
            col,
        } = self.edge_coord(edge);
        match axis {
            Axis::Vertical => orientation == Orientation::Horizontal && row == 0,
            Axis::Horizontal => orientation == Orientation::Vertical && col == 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn rejects_small_sizes() {
        assert_eq!(ToricLattice::new(1), Err(Error::InvalidSize(1)));
        assert_eq!(ToricLattice::new(0), Err(Error::InvalidSize(0)));
    }

    #[test]
    fn element_counts() {
        let l2 = ToricLattice::new(2).unwrap();
        assert_eq!(
            (l2.num_edges(), l2.num_plaquettes(), l2.num_stars()),
            (8, 4, 4)
        );
        assert_eq!(ToricLattice::new(16).unwrap().num_edges(), 512);
    }

    #[test]
    fn edge_coordinates_round_trip() {
        let lat = ToricLattice::new(5).unwrap();
        for e in 0..lat.num_edges() {
            let c = lat.edge_coord(e);
            assert_eq!(lat.edge_id(c.orientation, c.row, c.col), e);
        }
    }

    #[test]
    fn incidence_is_consistent() {
        for l in 2..7 {
            let lat = ToricLattice::new(l).unwrap();
            let mut plaquette_cover = vec![0; lat.num_edges()];
            let mut star_cover = vec![0; lat.num_edges()];
            for p in 0..lat.num_plaquettes() {
                let edges = lat.plaquette_edges(p);
                for e in edges {
                    plaquette_cover[e] += 1;
                    assert!(lat.edge_plaquettes(e).contains(&p));
                }
                for e in lat.star_edges(p) {
                    star_cover[e] += 1;
                    assert!(lat.edge_stars(e).contains(&p));
                }
            }
            assert!(plaquette_cover.iter().all(|&n| n == 2));
            assert!(star_cover.iter().all(|&n| n == 2));
            let total: usize = (0..lat.num_plaquettes())
                .map(|p| lat.plaquette_edges(p).len())
                .sum();
            assert_eq!(total, 2 * lat.num_edges());
        }
    }

    #[test]
    fn l2_plaquettes_have_distinct_edges() {
        let lat = ToricLattice::new(2).unwrap();
        for p in 0..4 {
            let set: HashSet<_> = lat.plaquette_edges(p).into_iter().collect();
            assert_eq!(set.len(), 4);
        }
    }

    #[test]
    fn neighbouring_plaquettes_share_one_edge_on_l3() {
        let lat = ToricLattice::new(3).unwrap();
        for p in 0..9 {
            for (q, shared) in lat.plaquette_neighbors(p) {
                let a: HashSet<_> = lat.plaquette_edges(p).into_iter().collect();
                let b: HashSet<_> = lat.plaquette_edges(q).into_iter().collect();
                let common: Vec<_> = a.intersection(&b).copied().collect();
                assert_eq!(common, vec![shared]);
            }
        }
    }

    #[test]
    fn out_of_range_is_an_error() {
        let lat = ToricLattice::new(3).unwrap();
        assert!(matches!(
            lat.incidence(Element::Edge, 18),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(lat.incidence(Element::Plaquette, 8).is_ok());
        assert!(lat.incidence(Element::Star, 9).is_err());
    }

    #[test]
    fn test_lines_cross_star_boundaries_evenly() {
        for l in 2..8 {
            let lat = ToricLattice::new(l).unwrap();
            for axis in [Axis::Horizontal, Axis::Vertical] {
                let line = lat.test_line(axis);
                assert_eq!(line.len(), l);
                for e in &line {
                    assert!(lat.on_test_line(axis, *e));
                }
                for s in 0..lat.num_stars() {
                    let hits = lat
                        .star_edges(s)
                        .iter()
                        .filter(|e| line.contains(e))
                        .count();
                    assert_eq!(hits % 2, 0);
                }
            }
        }
    }
}
