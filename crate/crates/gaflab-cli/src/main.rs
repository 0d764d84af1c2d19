fn main() {
    // Placeholder during bring-up; replaced by the full CLI.
    eprintln!("gaflab CLI: under construction");
    std::process::exit(2);
}
