use crate::field::{FieldState, SiteKind};
use crate::lattice::CS2;

/// Pull streaming with periodic wrap. Links whose source is solid are left at
/// zero for [`apply_boundaries`]; the post-collision values are kept.
pub fn stream(state: &mut FieldState) {
    let d = state.descriptor();
    let q = d.q();
    let (nx, ny) = (state.nx as isize, state.ny as isize);
    std::mem::swap(&mut state.f, &mut state.post);
    let (f, post, sites) = (&mut state.f, &state.post, &state.sites);
    for y in 0..ny {
        for x in 0..nx {
            let dst = (y * nx + x) as usize;
            let out = &mut f[dst * q..(dst + 1) * q];
            if !sites[dst].is_fluid() {
                out.iter_mut().for_each(|v| *v = 0.0);
                continue;
            }
            for (i, v) in d.velocities.iter().enumerate() {
                let sx = (x - v[0] as isize).rem_euclid(nx);
                let sy = (y - v[1] as isize).rem_euclid(ny);
                let src = (sy * nx + sx) as usize;
                out[i] = if sites[src].is_fluid() { post[src * q + i] } else { 0.0 };
            }
        }
    }
}

/// Halfway bounce-back on links whose upstream site is solid. Moving walls
/// add `-2 w_j rho (v_j . u_w) / c_s^2`, with `j` the outgoing channel.
pub fn apply_boundaries(state: &mut FieldState) {
    let d = state.descriptor();
    let q = d.q();
    let (nx, ny) = (state.nx as isize, state.ny as isize);
    if state.sites.iter().all(|s| s.is_fluid()) {
        return;
    }
    let (f, post, sites) = (&mut state.f, &state.post, &state.sites);
    for y in 0..ny {
        for x in 0..nx {
            let idx = (y * nx + x) as usize;
            if !sites[idx].is_fluid() {
                continue;
            }
            let before = &post[idx * q..(idx + 1) * q];
            let mut rho = None;
            for (i, v) in d.velocities.iter().enumerate() {
                let sx = (x - v[0] as isize).rem_euclid(nx);
                let sy = (y - v[1] as isize).rem_euclid(ny);
                let src = (sy * nx + sx) as usize;
                let j = d.opposite[i];
                let value = match sites[src] {
                    SiteKind::Fluid => continue,
                    SiteKind::Wall => before[j],
                    SiteKind::MovingWall { velocity } => {
                        let rho = *rho.get_or_insert_with(|| d.density(before));
                        let vj = d.velocities[j];
                        let vu = vj[0] as f64 * velocity[0] + vj[1] as f64 * velocity[1];
                        before[j] - 2.0 * d.weights[j] * rho * vu / CS2
                    }
                };
                f[idx * q + i] = value;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Model;

    #[test]
    fn single_packet_moves_right() {
        let mut s = FieldState::new(Model::D1Q3, 5, 1).unwrap();
        s.site_mut(2, 0)[1] = 1.0;
        stream(&mut s);
        assert_eq!(s.site(3, 0), &[0.0, 1.0, 0.0]);
        assert_eq!(s.total_mass(), 1.0);
    }

    #[test]
    fn periodic_wrap_has_order_l() {
        let mut s = FieldState::new(Model::D2Q9, 5, 3).unwrap();
        for (i, v) in s.f.iter_mut().enumerate() {
            *v = i as f64;
        }
        let orig = s.f.clone();
        for _ in 0..15 {
            stream(&mut s);
        }
        assert_eq!(s.f, orig);
    }

    #[test]
    fn left_wall_reflects_into_right_channel() {
        let mut s = FieldState::new(Model::D1Q3, 4, 1).unwrap();
        s.set_kind(0, 0, SiteKind::Wall).unwrap();
        s.site_mut(1, 0)[2] = 0.7;
        stream(&mut s);
        apply_boundaries(&mut s);
        assert_eq!(s.site(1, 0), &[0.0, 0.7, 0.0]);
        assert_eq!(s.total_mass(), 0.7);
    }

    #[test]
    fn resting_wall_equals_plain_bounce_back() {
        let mut a = FieldState::uniform(Model::D2Q9, 6, 6, 1.0).unwrap();
        for x in 0..6 {
            a.set_kind(x, 0, SiteKind::Wall).unwrap();
        }
        let mut b = a.clone();
        for x in 0..6 {
            a.set_kind(x, 5, SiteKind::Wall).unwrap();
            b.set_kind(x, 5, SiteKind::MovingWall { velocity: [0.0, 0.0] }).unwrap();
        }
        stream(&mut a);
        apply_boundaries(&mut a);
        stream(&mut b);
        apply_boundaries(&mut b);
        assert_eq!(a.f, b.f);
    }

    #[test]
    fn moving_lid_injects_momentum() {
        let mut s = FieldState::uniform(Model::D2Q9, 8, 8, 1.0).unwrap();
        for x in 0..8 {
            s.set_kind(x, 0, SiteKind::Wall).unwrap();
            s.set_kind(x, 7, SiteKind::MovingWall { velocity: [0.2, 0.0] }).unwrap();
        }
        let p0 = s.total_momentum()[0];
        stream(&mut s);
        apply_boundaries(&mut s);
        let p1 = s.total_momentum()[0];
        // 8 lid-adjacent sites, two diagonal links each: 2 * 2 w rho u / cs2
        let expect = 8.0 * 2.0 * (2.0 * (1.0 / 36.0) * 0.2 * 3.0);
        assert!(p1 - p0 > 0.0);
        assert!((p1 - p0 - expect).abs() < 1e-14);
    }
}
