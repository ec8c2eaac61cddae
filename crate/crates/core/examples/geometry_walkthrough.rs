//! Relief-point geometry: the point toward the sink on a contributor's
//! range circle, two-circle cross sections and the common point of several
//! circles closest to the sink.
//!
//! `cargo run --example geometry_walkthrough`

use mobilecc::geometry::{
    circle_circle_intersections, common_point_closest_to_sink, distance, point_toward_sink, Point,
};

fn main() -> mobilecc::Result<()> {
    let sink = Point::new(2.0, 46.0);

    let c = Point::new(0.0, 0.0);
    let p = point_toward_sink(c, 2.5, sink)?;
    println!("point toward sink from {c} with r=2.5: ({:.4}, {:.4})", p.x, p.y);
    println!("  distance to the sink: {:.4}", distance(p, sink));

    let (a, b) = (Point::new(0.0, 0.0), Point::new(2.0, 0.0));
    let cross = circle_circle_intersections(a, 2.5, b, 2.5)?;
    for q in cross.points() {
        println!("cross section of r=2.5 circles at {a} and {b}: ({:.4}, {:.4})", q.x, q.y);
    }

    match common_point_closest_to_sink(&[a, b], 2.5, sink)? {
        Some(q) => println!("common point closest to {sink}: ({:.4}, {:.4})", q.x, q.y),
        None => println!("the circles share no point"),
    }

    let far = [a, Point::new(10.0, 0.0)];
    println!(
        "circles 10 m apart, r=2.5: {:?}",
        common_point_closest_to_sink(&far, 2.5, sink)?
    );
    Ok(())
}
