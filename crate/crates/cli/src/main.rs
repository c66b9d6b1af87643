fn main() {
    std::process::exit(boostlab_cli::main_with(std::env::args_os()));
}
