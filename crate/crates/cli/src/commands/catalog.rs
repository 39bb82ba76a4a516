use std::fmt::Write as _;
use std::path::Path;

use isrp_core::models::{catalog, catalog_dot, catalog_json};

use crate::error::{CliError, CliResult};
use crate::output::Staging;
use crate::{CatalogArgs, CatalogFormat};

use super::Ctx;

fn table() -> String {
    let rows: Vec<[String; 5]> = catalog()
        .iter()
        .map(|e| {
            [
                e.id.to_string(),
                e.params.iter().map(|p| p.name()).collect::<Vec<_>>().join(","),
                if e.has_closed_form { "closed" } else { "ode" }.to_string(),
                e.limit.to_string(),
                e.label.to_string(),
            ]
        })
        .collect();
    let header = ["model", "params", "form", "limit", "label"];
    let mut widths = header.map(str::len);
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let parts: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&header);
    for r in &rows {
        line(&r.each_ref().map(String::as_str));
    }
    out
}

pub fn run(ctx: &Ctx, a: CatalogArgs) -> CliResult<()> {
    let format = match (a.format, ctx.cfg.format.as_deref()) {
        (Some(f), _) => f,
        (None, None) => CatalogFormat::Table,
        (None, Some(s)) => match s.to_ascii_lowercase().as_str() {
            "json" => CatalogFormat::Json,
            "dot" => CatalogFormat::Dot,
            "table" => CatalogFormat::Table,
            _ => return Err(CliError::config(format!("unknown catalog format `{s}`"))),
        },
    };
    let mut text = match format {
        CatalogFormat::Json => catalog_json(),
        CatalogFormat::Dot => catalog_dot(),
        CatalogFormat::Table => table(),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match a.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| CliError::config(format!("`{}` is not a file path", path.display())))?
                .to_string();
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let mut stage = Staging::new(dir)?;
            stage.write_bytes(&name, text.as_bytes())?;
            stage.commit()?;
            Ok(())
        }
    }
}
