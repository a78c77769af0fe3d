fn main() {
    std::process::exit(dcelab_core::cli::run_command(std::env::args_os()));
}
