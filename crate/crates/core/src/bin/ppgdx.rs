fn main() {
    std::process::exit(ppg_diabetes::cli::main_from(std::env::args_os()));
}
