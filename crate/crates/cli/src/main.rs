fn main() {
    std::process::exit(ppuf_cli::main_with_args(std::env::args_os()));
}
