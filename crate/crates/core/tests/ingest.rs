//! Ingestion against a local World Bank style server.

use std::collections::BTreeMap;
use std::thread;
use std::time::Duration;

use metaqa_core::fixtures::{m49_csv, synthetic_context, wb_api_response, DECOY_INDICATOR};
use metaqa_core::wb_data::{ingest, load, persist, DataContext, IngestError, WorldBankClient};

fn serve(ctx: DataContext) -> String {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let addr = format!("http://{}", server.server_addr().to_ip().unwrap());
    thread::spawn(move || {
        for req in server.incoming_requests() {
            let (status, body) = wb_api_response(&ctx, req.url());
            let resp = tiny_http::Response::from_string(body.to_string()).with_status_code(status);
            let _ = req.respond(resp);
        }
    });
    addr
}

#[test]
fn ingest_reproduces_the_served_context() {
    let ctx = synthetic_context(4);
    let base = serve(ctx.clone());
    let dir = tempfile::tempdir().unwrap();
    let m49 = dir.path().join("m49.csv");
    std::fs::write(&m49, m49_csv(&ctx)).unwrap();
    let client = WorldBankClient::new(&base);

    let (got, summary) = ingest(&client, m49.to_str().unwrap(), ctx.years(), BTreeMap::new(), &[]).unwrap();
    assert_eq!(summary.listed, ctx.catalogue().len() + 1);
    assert_eq!(summary.kept, ctx.catalogue().len());
    assert!(got.catalogue().iter().all(|i| i.code.as_str() != DECOY_INDICATOR.0));
    assert_eq!(got.countries(), ctx.countries());
    assert_eq!(got.regions(), ctx.regions());
    assert_eq!(got.tables(), ctx.tables());
    assert!(got.catalogue().iter().all(|i| i.paraphrases.is_empty()));

    // paraphrases from an earlier store survive a re-ingest
    let (again, _) = ingest(&client, m49.to_str().unwrap(), ctx.years(), BTreeMap::new(), ctx.catalogue()).unwrap();
    assert_eq!(again, ctx);
    let out = dir.path().join("data");
    persist(&again, &out).unwrap();
    assert_eq!(load(&out).unwrap(), ctx);
}

#[test]
fn unreachable_host_is_a_transport_error() {
    let client = WorldBankClient::new("http://127.0.0.1:9").with_retries(1, Duration::from_millis(1));
    let err = client.fetch_countries().unwrap_err();
    assert!(matches!(err, IngestError::Transport { .. }), "{err}");
}


#[test]
fn pages_are_concatenated_in_order() {
    let ctx = synthetic_context(4);
    let client = WorldBankClient::new(&serve(ctx.clone())).with_per_page(7);
    assert_eq!(client.fetch_countries().unwrap(), ctx.countries());
    let code = &ctx.catalogue()[0].code;
    let years = metaqa_core::wb_data::YearRange::new(2010, 2012).unwrap();
    let table = WorldBankClient::new(&serve(ctx.clone())).with_per_page(50).fetch_indicator_data(code, years).unwrap();
    let expected: Vec<_> = ctx.table(code).unwrap().iter().filter(|(_, y, _)| years.contains(*y)).collect();
    assert_eq!(table.iter().collect::<Vec<_>>(), expected);
}
