use clap::Parser;

fn main() {
    let cli = jamcgan_cli::Cli::parse();
    match jamcgan_cli::run(cli) {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("jamcgan: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
