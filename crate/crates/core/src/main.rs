fn main() {
    std::process::exit(pie_cert::cli::main_with(std::env::args_os()));
}
