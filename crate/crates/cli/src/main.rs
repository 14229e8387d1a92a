use clap::Parser;
use snapforge_cli::cli::{Cli, Format};
use snapforge_cli::commands::execute;
use snapforge_cli::configure_threads;
use snapforge_cli::manifest::Invocation;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| execute(&cli, &Invocation::current()));
    match result {
        Ok(outcome) => {
            match cli.format {
                Format::Text => outcome.text.iter().for_each(|l| println!("{l}")),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome).expect("outcome serializes")
                ),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if cli.format == Format::Json {
                let body = serde_json::json!({ "error": e.message, "exit_code": e.exit_code() });
                println!("{body}");
            }
            std::process::exit(e.exit_code());
        }
    }
}
