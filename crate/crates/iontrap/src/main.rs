fn main() {
    std::process::exit(iontrap::app::main_with_args(std::env::args_os()));
}
