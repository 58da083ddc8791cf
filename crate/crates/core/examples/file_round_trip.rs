//! Writes a synthetic correspondence file with its ground-truth sidecar,
//! reads both back and solves from the file contents.

use radial_homography::geometry::homography_error;
use radial_homography::io::{
    read_correspondences, read_ground_truth, sidecar_path, write_correspondences, write_ground_truth, GroundTruth,
};
use radial_homography::robust::{ransac, RobustConfig};
use radial_homography::scene::{generate_instance, SceneConfig};

fn main() -> radial_homography::Result<()> {
    let dir = std::env::temp_dir().join("rdh-example");
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("matches.csv");
    let inst = generate_instance(&SceneConfig { num_points: 150, noise_sigma_px: 0.5, outlier_fraction: 0.3, ..Default::default() })?;
    write_correspondences(&csv, &inst.corrs)?;
    write_ground_truth(&sidecar_path(&csv), &GroundTruth::from_instance(&inst)?)?;
    println!("wrote {} and {}", csv.display(), sidecar_path(&csv).display());

    let corrs = read_correspondences(&csv)?;
    let gt = read_ground_truth(&sidecar_path(&csv))?;
    let normalized: Vec<_> = corrs.iter().map(|c| c.scaled(1.0 / gt.focal)).collect();
    let res = ransac(&normalized, &RobustConfig { focal_scale: gt.focal, ..Default::default() })?;
    println!(
        "{} inliers of {}, H error {:.2e}, λ {:+.4} (true {:+.4}), λ′ {:+.4} (true {:+.4})",
        res.num_inliers(),
        corrs.len(),
        homography_error(&res.model.h, &gt.homography()?)?,
        res.model.lambda,
        gt.lambda,
        res.model.lambda_p,
        gt.lambda_p
    );
    Ok(())
}
