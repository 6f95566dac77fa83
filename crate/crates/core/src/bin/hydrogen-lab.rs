fn main() {
    std::process::exit(hydrogen_semiclassics::experiments::cli::run(std::env::args_os()));
}
