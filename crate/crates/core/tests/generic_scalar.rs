use rtasim::agents::{acc_step, dubins_car_step, dubins_plane_step, AccState, DubinsCarState, DubinsPlaneState, Mode};
use rtasim::{AccParams, AccParams32, DubinsCarParams, DubinsCarParams32, DubinsPlaneParams, DubinsPlaneParams32};
use rtasim::{Polytope, Polytope32, UnsafeSet, UnsafeSet32};

#[test]
fn acc_step_agrees_across_precisions() {
    let (p64, p32) = (AccParams::default(), AccParams32::default());
    let (mut s64, mut s32) = (AccState { p: 0.0f64, v: 1.0 }, AccState { p: 0.0f32, v: 1.0 });
    for k in 0..40 {
        let mode = [Mode::Untrusted, Mode::Safety, Mode::Normal][k % 3];
        s64 = acc_step(mode, s64, 0.1, Some((10.0, 1.0)), &p64).unwrap().0;
        s32 = acc_step(mode, s32, 0.1, Some((10.0, 1.0)), &p32).unwrap().0;
        assert!((s64.p - s32.p as f64).abs() < 1e-3 && (s64.v - s32.v as f64).abs() < 1e-3);
    }
}

#[test]
fn dubins_steps_agree_across_precisions() {
    let (c64, c32) = (DubinsCarParams::default(), DubinsCarParams32::default());
    let mut a = DubinsCarState { x: 0.0f64, y: 0.0, theta: 0.3, v: 1.0 };
    let mut b = DubinsCarState { x: 0.0f32, y: 0.0, theta: 0.3, v: 1.0 };
    for _ in 0..100 {
        a = dubins_car_step(Mode::Untrusted, a, 0.05, Some(&[5.0, 5.0]), &c64).unwrap();
        b = dubins_car_step(Mode::Untrusted, b, 0.05, Some(&[5.0, 5.0]), &c32).unwrap();
    }
    assert!((a.x - b.x as f64).abs() < 1e-3 && (a.y - b.y as f64).abs() < 1e-3);

    let (q64, q32) = (DubinsPlaneParams::default(), DubinsPlaneParams32::default());
    let mut a = DubinsPlaneState { x: 0.0f64, y: 0.0, z: 10.0, theta: 0.0, gamma: 0.0, v: 6.0 };
    let mut b = DubinsPlaneState { x: 0.0f32, y: 0.0, z: 10.0, theta: 0.0, gamma: 0.0, v: 6.0 };
    for _ in 0..100 {
        a = dubins_plane_step(Mode::Safety, a, 0.05, Some(&[50.0, 0.0, 0.0]), &q64).unwrap();
        b = dubins_plane_step(Mode::Safety, b, 0.05, Some(&[50.0, 0.0, 0.0]), &q32).unwrap();
    }
    assert!((a.z - b.z as f64).abs() < 1e-3);
    assert!(a.z > 10.0, "safety mode climbs");
}

#[test]
fn geometry_agrees_across_precisions() {
    let rows = vec![vec![1.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]];
    let p64 = Polytope::new(rows.clone(), vec![1.0, 0.0, 0.0]).unwrap();
    let rows32: Vec<Vec<f32>> = rows.iter().map(|r| r.iter().map(|&x| x as f32).collect()).collect();
    let p32 = Polytope32::new(rows32, vec![1.0, 0.0, 0.0]).unwrap();
    let a = p64.project(&[2.0, 2.0]).unwrap().point;
    let b = p32.project(&[2.0, 2.0]).unwrap().point;
    assert!((a[0] - 0.5).abs() < 1e-12 && (a[1] - 0.5).abs() < 1e-12);
    assert!((b[0] - 0.5).abs() < 1e-5 && (b[1] - 0.5).abs() < 1e-5);

    let ball64 = UnsafeSet::ball(vec![0.0, 0.0], 1.0).unwrap();
    let ball32 = UnsafeSet32::ball(vec![0.0, 0.0], 1.0).unwrap();
    assert!((ball64.distance(&[3.0, 4.0]).unwrap() - 4.0).abs() < 1e-12);
    assert!((ball32.distance(&[3.0, 4.0]).unwrap() - 4.0).abs() < 1e-5);
    assert!(ball32.contains(&[0.6, 0.8]).unwrap());
}
