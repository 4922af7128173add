//! Regenerates the sample geometry files in `geometries/`.

use asg1_core::io::serialize_geometry;
use asg1_core::samples::{bilinear_corpus, five_patch_generic, three_patch_generic};
use asg1_core::spline::NumberMode;

fn main() {
    let dir = std::path::Path::new("geometries");
    std::fs::create_dir_all(dir).unwrap();
    let corpus = bilinear_corpus(2, 1, 0).unwrap();
    let named = [
        ("two_patch_squares", &corpus[0]),
        ("two_patch_quads", &corpus[1]),
        ("l_shape", &corpus[4]),
    ];
    for (name, geom) in named {
        let text = serialize_geometry(geom, None, NumberMode::ExactRational).unwrap();
        std::fs::write(dir.join(format!("{name}.json")), text).unwrap();
    }
    let three = three_patch_generic().unwrap();
    std::fs::write(
        dir.join("three_patch_generic.json"),
        serialize_geometry(&three, None, NumberMode::ExactRational).unwrap(),
    )
    .unwrap();
    let five = five_patch_generic().unwrap();
    std::fs::write(
        dir.join("five_patch_generic.json"),
        serialize_geometry(&five, None, NumberMode::ExactRational).unwrap(),
    )
    .unwrap();
    println!("wrote 5 geometry files");
}
