fn main() {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = cvclone_cli::run(std::env::args_os(), &mut stdout) {
        eprintln!("cvclone: {e}");
        std::process::exit(e.exit_code());
    }
}
