fn main() {
    let status = covkit::cli::run(std::env::args_os());
    std::process::exit(status as i32);
}
