fn main() {
    if let Err(err) = gbirthday::app::run(std::env::args().collect()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
