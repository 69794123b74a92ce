fn main() {
    std::process::exit(l2lab::runner::cli_main(std::env::args_os()));
}
