use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Parser;
use snapforge::distfield::{read_field, SurfaceIndex};
use snapforge::surfacegen::load_mesh;
use snapforge_tuneserver::{router, Catalog, Surface};

/// Serves force profiles and live simulation sessions for the tuning workbench.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8787")]
    addr: SocketAddr,
    /// Distance-field resolution for surfaces without a cached field.
    #[arg(long, default_value_t = 48)]
    sdf_res: usize,
    /// Extra surface as `name=mesh.obj` or `name=mesh.obj,field.sdf`.
    #[arg(long = "surface", value_parser = parse_surface)]
    surfaces: Vec<(String, PathBuf, Option<PathBuf>)>,
    /// Serve only the surfaces given with --surface.
    #[arg(long, requires = "surfaces")]
    no_builtin: bool,
}

fn parse_surface(s: &str) -> Result<(String, PathBuf, Option<PathBuf>), String> {
    let (name, rest) = s.split_once('=').ok_or("expected name=mesh.obj[,field.sdf]")?;
    if name.is_empty() {
        return Err("empty surface name".into());
    }
    let (mesh, sdf) = match rest.split_once(',') {
        Some((m, f)) => (m, Some(PathBuf::from(f))),
        None => (rest, None),
    };
    Ok((name.to_string(), PathBuf::from(mesh), sdf))
}

fn load(args: &Args) -> Result<Catalog, String> {
    let mut catalog = if args.no_builtin {
        Catalog::default()
    } else {
        Catalog::builtin(args.sdf_res)?
    };
    for (name, mesh, sdf) in &args.surfaces {
        let loaded = load_mesh(mesh).map_err(|e| format!("{}: {e}", mesh.display()))?;
        for w in &loaded.warnings {
            log::warn!("{}: {w}", mesh.display());
        }
        let surface = match sdf {
            Some(path) => {
                let file = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
                let field = read_field(std::io::BufReader::new(file))
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                Surface::new(name, SurfaceIndex::new(loaded.mesh), field)
            }
            None => Surface::build(name, loaded.mesh, args.sdf_res)?,
        };
        catalog.insert(surface);
    }
    Ok(catalog)
}

#[tokio::main]
async fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let catalog = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(3);
        }
    };
    let listener = match tokio::net::TcpListener::bind(args.addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: bind {}: {e}", args.addr);
            std::process::exit(1);
        }
    };
    log::info!(
        "serving {} on http://{}",
        catalog.names().collect::<Vec<_>>().join(", "),
        args.addr
    );
    if let Err(e) = axum::serve(listener, router(catalog)).await {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
