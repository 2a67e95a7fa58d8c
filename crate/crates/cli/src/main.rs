fn main() {
    std::process::exit(entbound_cli::app::main_with(std::env::args_os()));
}
