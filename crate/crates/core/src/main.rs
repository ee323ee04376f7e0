fn main() {
    std::process::exit(author_topic::cli::run(std::env::args_os()));
}
