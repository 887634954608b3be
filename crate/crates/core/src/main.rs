fn main() {
    std::process::exit(qcorr::cli::main_with_args(std::env::args_os()));
}
