//! Four-point homography without SVD, checked against the mapped points.

use radial_homography::geometry::{closed_form_homography, PointQuad};
use radial_homography::{HomPoint, Vec2};

fn main() -> radial_homography::Result<()> {
    let src = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
    let dst = [Vec2::new(0.1, -0.2), Vec2::new(1.3, 0.1), Vec2::new(1.1, 1.4), Vec2::new(-0.2, 0.9)];
    let h = closed_form_homography(&PointQuad::from_euclidean(src), &PointQuad::from_euclidean(dst))?;
    println!("H (unit Frobenius norm):\n{:.6}", h.canonical()?);
    for (s, d) in src.iter().zip(&dst) {
        let mapped = h.apply(&HomPoint::from_euclidean(*s));
        println!(
            "({:5.2}, {:5.2}) -> ({:8.5}, {:8.5})  expected ({:5.2}, {:5.2})",
            s.x,
            s.y,
            mapped.u() / mapped.w(),
            mapped.v() / mapped.w(),
            d.x,
            d.y
        );
    }
    Ok(())
}
