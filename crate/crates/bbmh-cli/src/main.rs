use clap::Parser;

fn main() {
    let cli = bbmh_cli::cli::Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(err) = bbmh_cli::cli::run(cli, &mut out) {
        eprintln!("error: {err}");
        std::process::exit(err.code);
    }
}
