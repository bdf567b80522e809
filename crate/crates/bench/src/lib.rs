//! Shared fixtures for the kernel benchmarks.

use sweepconf::synth::{preset, render};
use sweepconf::Image;

/// Left/right pair of the `clean` preset cropped to `width` x `height`.
pub fn clean_pair(width: usize, height: usize) -> (Image, Image) {
    let mut spec = preset("clean").expect("clean preset");
    spec.width = width;
    spec.height = height;
    spec.layers[0].region.width = width;
    spec.layers[0].region.height = height;
    let (left, right, _) = render(&spec).expect("valid scene");
    (left, right)
}
