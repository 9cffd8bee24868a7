use std::io;

fn main() {
    if let Err(e) = mhk::cli::init_threads() {
        eprintln!("error: {e}");
        std::process::exit(mhk::cli::EXIT_USAGE);
    }
    let code = mhk::cli::dispatch(std::env::args_os(), &mut io::stdin().lock(), &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(code);
}
