use crate::radio_env::Point;

/// One 120-degree sector drawn as the rhombus `site + a*u + b*v`, a, b in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub site: usize,
    pub u: Point,
    pub v: Point,
}

impl Sector {
    pub fn azimuth_deg(&self) -> f64 {
        (self.u.y_m + self.v.y_m).atan2(self.u.x_m + self.v.x_m).to_degrees().rem_euclid(360.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HexTopology {
    pub isd_m: f64,
    pub sites: Vec<Point>,
    pub sectors: Vec<Sector>,
    pub tv_center: Point,
    pub tv_radius_m: f64,
}

fn polar(r: f64, deg: f64) -> Point {
    let a = deg.to_radians();
    Point::new(r * a.cos(), r * a.sin())
}

/// 19-site layout: centre, ring 1 at `isd`, ring 2 at `2 isd` and
/// `sqrt(3) isd`; three rhombic sectors per site tile its hexagonal cell.
/// The TV transmitter sits at `offset` from the centre site.
pub fn build_topology(isd_m: f64, tv_radius_m: f64, offset: Point) -> HexTopology {
    assert!(isd_m > 0.0, "inter-site distance must be positive");
    let mut sites = vec![Point::default()];
    sites.extend((0..6).map(|k| polar(isd_m, 60.0 * k as f64)));
    for k in 0..6 {
        sites.push(polar(2.0 * isd_m, 60.0 * k as f64));
        sites.push(polar(3f64.sqrt() * isd_m, 30.0 + 60.0 * k as f64));
    }
    // Cell vertices sit at 30 + 60 j degrees, circumradius isd / sqrt(3).
    let rc = isd_m / 3f64.sqrt();
    let sectors = (0..sites.len())
        .flat_map(|site| {
            (0..3).map(move |k| Sector {
                site,
                u: polar(rc, 30.0 + 120.0 * k as f64),
                v: polar(rc, 150.0 + 120.0 * k as f64),
            })
        })
        .collect();
    HexTopology { isd_m, sites, sectors, tv_center: offset, tv_radius_m }
}

impl HexTopology {
    pub fn sector_point(&self, sector: usize, a: f64, b: f64) -> Point {
        let s = &self.sectors[sector];
        let o = self.sites[s.site];
        Point::new(o.x_m + a * s.u.x_m + b * s.v.x_m, o.y_m + a * s.u.y_m + b * s.v.y_m)
    }

    pub fn nearest_site(&self, p: Point) -> usize {
        let mut best = 0;
        for (i, s) in self.sites.iter().enumerate() {
            if s.distance(&p) < self.sites[best].distance(&p) {
                best = i;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_counts() {
        let t = build_topology(500.0, 3000.0, Point::default());
        assert_eq!(t.sites.len(), 19);
        assert_eq!(t.sectors.len(), 57);
    }

    #[test]
    fn ring_radii() {
        let t = build_topology(500.0, 3000.0, Point::default());
        let mut r: Vec<f64> = t.sites.iter().map(|s| s.distance(&Point::default())).collect();
        r.sort_by(f64::total_cmp);
        assert!(r[0].abs() < 1e-9);
        assert!(r[1..7].iter().all(|x| (x - 500.0).abs() < 1e-9));
        assert!(r[7..13].iter().all(|x| (x - 500.0 * 3f64.sqrt()).abs() < 1e-9));
        assert!(r[13..].iter().all(|x| (x - 1000.0).abs() < 1e-9));
    }

    #[test]
    fn sectors_split_the_circle() {
        let t = build_topology(500.0, 3000.0, Point::default());
        for site in 0..19 {
            let mut az: Vec<f64> = t.sectors.iter().filter(|s| s.site == site).map(|s| s.azimuth_deg()).collect();
            az.sort_by(f64::total_cmp);
            assert!((az[1] - az[0] - 120.0).abs() < 1e-9 && (az[2] - az[1] - 120.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sector_points_belong_to_their_site() {
        let t = build_topology(500.0, 3000.0, Point::default());
        for (i, s) in t.sectors.iter().enumerate() {
            assert_eq!(t.nearest_site(t.sector_point(i, 0.4, 0.7)), s.site);
        }
    }

    #[test]
    fn offset_moves_tv() {
        let t = build_topology(500.0, 3000.0, Point::default());
        assert_eq!(t.tv_center, t.sites[0]);
    }
}
