use clap::Parser;

fn main() {
    let cli = pit2crack_cli::Cli::parse();
    match pit2crack_cli::run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            std::process::exit(out.code);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.code);
        }
    }
}
