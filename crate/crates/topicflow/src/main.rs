fn main() {
    std::process::exit(topicflow::cli::main_with(std::env::args_os()));
}
