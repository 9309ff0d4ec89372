import init, { star_schedule, regression, simulate } from "./pkg/keynet_web.js";

const $ = (id) => document.getElementById(id);

function guard(target, fn) {
  try {
    fn();
  } catch (e) {
    target.innerHTML = "";
    const p = document.createElement("p");
    p.className = "error";
    p.textContent = String(e);
    target.appendChild(p);
  }
}

function cell(tag, text, cls) {
  const el = document.createElement(tag);
  el.textContent = text;
  if (cls) el.className = cls;
  return el;
}

function renderStar() {
  const out = $("star-out");
  guard(out, () => {
    const view = JSON.parse(star_schedule(Number($("star-n").value)));
    const table = document.createElement("table");
    const head = table.insertRow();
    head.appendChild(cell("th", "Host"));
    for (const step of view.steps) head.appendChild(cell("th", `step ${step.index}`));
    for (let h = 0; h < view.n; h++) {
      const row = table.insertRow();
      row.appendChild(cell("th", String(h + 1)));
      for (const step of view.steps) {
        const s = step.hosts[h];
        const text = s.state === "initiator" ? `${s.host} → ${s.peer}` : s.state === "utilized" ? "★" : "○";
        row.appendChild(cell("td", text, s.state));
      }
    }
    out.replaceChildren(cell("p", `${view.steps.length} steps`), table);
  });
}

function renderRegression() {
  const out = $("reg-out");
  guard(out, () => {
    const fit = JSON.parse(regression(Number($("reg-n").value)));
    const w = 640, h = 400, pad = 50;
    const xMax = fit.points[fit.points.length - 1][0];
    const yMax = Math.max(...fit.points.map((p) => p[1]), fit.slope * xMax + fit.intercept);
    const sx = (x) => pad + (x / xMax) * (w - 2 * pad);
    const sy = (y) => h - pad - (y / yMax) * (h - 2 * pad);
    const ns = "http://www.w3.org/2000/svg";
    const svg = document.createElementNS(ns, "svg");
    svg.setAttribute("viewBox", `0 0 ${w} ${h}`);
    svg.setAttribute("width", w);
    const add = (name, attrs, text) => {
      const el = document.createElementNS(ns, name);
      for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
      if (text) el.textContent = text;
      svg.appendChild(el);
    };
    add("line", { x1: pad, y1: h - pad, x2: w - pad, y2: h - pad, stroke: "black" });
    add("line", { x1: pad, y1: h - pad, x2: pad, y2: pad, stroke: "black" });
    add("text", { x: w / 2, y: h - 12, "text-anchor": "middle" }, "N");
    add("text", { x: 14, y: h / 2, "text-anchor": "middle", transform: `rotate(-90 14 ${h / 2})` }, "SBEP(N)");
    const x0 = fit.points[0][0];
    add("line", {
      x1: sx(x0), y1: sy(fit.slope * x0 + fit.intercept),
      x2: sx(xMax), y2: sy(fit.slope * xMax + fit.intercept),
      stroke: "crimson", "stroke-width": 2,
    });
    for (const [x, y] of fit.points) add("circle", { cx: sx(x), cy: sy(y), r: 3, fill: "steelblue" });
    const caption = `f(N) = ${fit.slope.toPrecision(10)} N ${fit.intercept < 0 ? "-" : "+"} ${Math.abs(fit.intercept).toPrecision(10)}, R² = ${fit.r_squared.toPrecision(10)}`;
    out.replaceChildren(cell("p", caption), svg);
  });
}

function renderSimulation() {
  const out = $("sim-out");
  guard(out, () => {
    const r = JSON.parse(simulate($("sim-kind").value, Number($("sim-n").value), Number($("sim-k").value), $("sim-fail").value));
    const summary = [
      `steps executed: ${r.steps_executed} (schedule length ${r.schedule_len})`,
      `pairs with a full key: ${r.pairs.length - r.lost_pairs.length} of ${r.pairs.length}`,
      `lost: ${r.lost_pairs.join(" ") || "none"}`,
      `host utilization: min ${r.utilization_min.toFixed(3)}, mean ${r.utilization_mean.toFixed(3)}, max ${r.utilization_max.toFixed(3)}`,
    ];
    out.replaceChildren(cell("pre", summary.join("\n")));
  });
}

init().then(() => {
  $("status").textContent = "Ready.";
  $("star-go").addEventListener("click", renderStar);
  $("reg-go").addEventListener("click", renderRegression);
  $("sim-go").addEventListener("click", renderSimulation);
  renderStar();
  renderRegression();
  renderSimulation();
}, (e) => {
  $("status").textContent = `Could not load the WebAssembly module: ${e}`;
  $("status").className = "error";
});
