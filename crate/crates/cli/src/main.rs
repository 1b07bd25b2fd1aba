fn main() {
    std::process::exit(phonocat_cli::main_with(std::env::args_os()));
}
