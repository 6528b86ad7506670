//! wasm-bindgen bindings for the demo page in `www/`.

pub mod session;

use wasm_bindgen::prelude::*;

use session::DemoSession;

fn js(e: cevt_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    inner: DemoSession,
}

#[wasm_bindgen]
impl Demo {
    /// Simulate a drifting gradient of `frames` frames over `duration_us`.
    #[wasm_bindgen(constructor)]
    pub fn new(
        width: usize,
        height: usize,
        frames: usize,
        duration_us: u32,
        threshold: f64,
    ) -> Result<Demo, JsError> {
        let inner = DemoSession::new(width, height, frames, u64::from(duration_us), threshold)
            .map_err(js)?;
        Ok(Demo { inner })
    }

    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.inner.width()
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.inner.height()
    }

    #[wasm_bindgen(getter, js_name = eventCount)]
    pub fn event_count(&self) -> usize {
        self.inner.stream().len()
    }

    pub fn stats(&self) -> String {
        self.inner.stats_text()
    }

    #[wasm_bindgen(js_name = groundTruth)]
    pub fn ground_truth(&self, t_us: u32) -> Vec<u8> {
        self.inner.ground_truth_rgba(u64::from(t_us))
    }

    pub fn events(&self, t_us: u32, window_us: u32) -> Vec<u8> {
        self.inner
            .events_rgba(u64::from(t_us), u64::from(window_us))
    }

    #[wasm_bindgen(js_name = highPass)]
    pub fn high_pass(
        &self,
        t_us: u32,
        cutoff: f64,
        cutoff_per_event: f64,
        bilateral: bool,
    ) -> Result<Vec<u8>, JsError> {
        self.inner
            .hf_rgba(u64::from(t_us), cutoff, cutoff_per_event, bilateral)
            .map_err(js)
    }

    pub fn quarter(&self, t_us: u32, window_events: usize, decay: f64) -> Result<Vec<u8>, JsError> {
        self.inner
            .quarter_rgba(u64::from(t_us), window_events, decay)
            .map_err(js)
    }
}
