fn main() {
    std::process::exit(vorotens::cli::main_with_args(std::env::args_os()));
}
