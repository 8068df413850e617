fn main() {
    std::process::exit(lsv_core::cli::run(std::env::args_os()));
}
