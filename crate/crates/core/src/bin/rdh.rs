fn main() {
    std::process::exit(radial_homography::cli::run(std::env::args_os()));
}
