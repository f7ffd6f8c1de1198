use amfw_core::grid::{DirSet, Grid, GridField, MultiIndex, PointClass};
use proptest::prelude::*;

fn counts() -> impl Strategy<Value = Vec<usize>> {
    (1usize..=4).prop_flat_map(|d| prop::collection::vec(3usize..=7, d))
}

proptest! {
    #[test]
    fn flatten_unflatten_round_trip(n in counts(), closed in any::<bool>()) {
        let g = Grid::new(&n, closed).unwrap();
        for flat in 0..g.len() {
            let idx = g.unflatten(flat);
            prop_assert_eq!(g.flatten(&idx).unwrap(), flat);
        }
        for (flat, idx, _) in g.points() {
            prop_assert_eq!(g.flatten(&g.unflatten(flat)).unwrap(), flat);
            prop_assert_eq!(g.unflatten(g.flatten(&idx).unwrap()), idx);
        }
    }

    #[test]
    fn lines_partition_points(n in counts(), closed in any::<bool>()) {
        let g = Grid::new(&n, closed).unwrap();
        for dir in 0..g.dim() {
            let lines = g.lines(dir).unwrap();
            let per = lines.points_per_line();
            prop_assert_eq!(lines.count_lines() * per, g.len());
            let mut seen = vec![false; g.len()];
            for line in lines {
                let mut prev: Option<f64> = None;
                for f in line.indices() {
                    prop_assert!(!seen[f]);
                    seen[f] = true;
                    let x = g.point(f)[dir];
                    if let Some(p) = prev {
                        prop_assert!(x > p);
                    }
                    prev = Some(x);
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn spacing_and_coordinates(n in counts()) {
        let a = Grid::interior(&n).unwrap();
        let b = Grid::interior(&n).unwrap();
        for l in 0..n.len() {
            prop_assert_eq!(a.dx(l).to_bits(), (1.0 / (1.0 + n[l] as f64)).to_bits());
            prop_assert_eq!(a.dx(l).to_bits(), b.dx(l).to_bits());
        }
        for (_, idx, x) in a.points() {
            for l in 0..n.len() {
                prop_assert!(idx[l] >= 1 && idx[l] <= n[l]);
                prop_assert_eq!(x[l], idx[l] as f64 * a.dx(l));
            }
        }
        let prod: usize = n.iter().product();
        let closed: usize = n.iter().map(|m| m + 2).product();
        prop_assert_eq!(a.len(), prod);
        prop_assert_eq!(a.with_closed(true).len(), closed);
    }

    #[test]
    fn classification_matches_saturation(n in counts()) {
        let g = Grid::closed(&n).unwrap();
        for (_, idx, _) in g.points() {
            let sat: Vec<usize> = (0..g.dim()).filter(|&l| idx[l] == 0 || idx[l] == n[l] + 1).collect();
            let expect = if sat.is_empty() {
                PointClass::Interior
            } else {
                PointClass::Boundary(DirSet::from_dirs(&sat))
            };
            prop_assert_eq!(g.classify(&idx).unwrap(), expect);
        }
    }
}

#[test]
fn spec_examples() {
    let g = Grid::interior(&[3]).unwrap();
    let xs: Vec<f64> = g.points().map(|(_, _, x)| x[0]).collect();
    assert_eq!(xs, vec![0.25, 0.5, 0.75]);
    assert_eq!(g.dx(0), 0.25);

    let g = Grid::closed(&[7, 7, 7]).unwrap();
    assert_eq!(g.len(), 729);
    assert!((0..3).all(|l| g.dx(l) == 0.125));

    let g = Grid::interior(&[3, 5]).unwrap();
    assert_eq!(g.len(), 15);
    assert_eq!(g.spacings(), &[0.25, 1.0 / 6.0]);
}

#[test]
fn classify_examples() {
    let g = Grid::closed(&[3, 3]).unwrap();
    assert_eq!(
        g.classify(&MultiIndex::new(&[0, 2])).unwrap(),
        PointClass::Boundary(DirSet::from_dirs(&[0]))
    );
    assert_eq!(g.classify(&MultiIndex::new(&[2, 2])).unwrap(), PointClass::Interior);
    assert!(g.classify(&MultiIndex::new(&[5, 2])).is_err());

    let g = Grid::closed(&[3, 3, 3]).unwrap();
    assert_eq!(
        g.classify(&MultiIndex::new(&[0, 0, 2])).unwrap(),
        PointClass::Boundary(DirSet::from_dirs(&[0, 1]))
    );
}

#[test]
fn line_examples() {
    let g = Grid::interior(&[3, 4]).unwrap();
    let l = g.lines(0).unwrap();
    assert_eq!((l.count_lines(), l.points_per_line()), (4, 3));

    let g = Grid::interior(&[5]).unwrap();
    assert_eq!(g.lines(0).unwrap().count(), 1);

    let g = Grid::closed(&[7, 7, 7]).unwrap();
    let l = g.lines(2).unwrap();
    assert_eq!((l.count_lines(), l.points_per_line()), (81, 9));
    assert!(g.lines(3).is_err());
}

#[test]
fn rejects_small_grids() {
    assert!(Grid::interior(&[2]).is_err());
    assert!(Grid::interior(&[3, 2]).is_err());
    assert!(Grid::interior(&[]).is_err());
    assert!(Grid::interior(&[3; 5]).is_err());
}

#[test]
fn field_length_is_checked() {
    let g = Grid::interior(&[3, 3]).unwrap();
    assert!(GridField::from_vec(g, vec![0.0; 8]).is_err());
    assert!(GridField::from_vec(g, vec![0.0; 9]).is_ok());
}
