import init, { convergence, eigenfunction, profile } from "./pkg/hardy_fem_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function rows(flat, width) {
  const out = [];
  for (let i = 0; i + width <= flat.length; i += width) out.push(Array.from(flat.slice(i, i + width)));
  return out;
}

// Line plot of several series sharing an x axis; `logX`/`logY` plot log10 values.
function plot(canvas, series, { logX = false, logY = false, xLabel = "", yLabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 48;
  ctx.clearRect(0, 0, W, H);
  const tx = (x) => (logX ? Math.log10(x) : x);
  const ty = (y) => (logY ? Math.log10(y) : y);
  const pts = series.flatMap((s) => s.points.map(([x, y]) => [tx(x), ty(y)])).filter(([x, y]) => isFinite(x) && isFinite(y));
  if (pts.length === 0) return;
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))];
  if (x0 === x1) x1 = x0 + 1;
  if (y0 === y1) y1 = y0 + 1;
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (W - 2 * pad);
  const sy = (y) => H - pad + ((y - y0) / (y1 - y0)) * (2 * pad - H);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad / 2, W - 2 * pad, H - 1.5 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  for (let i = 0; i <= 4; i++) {
    const x = x0 + ((x1 - x0) * i) / 4, y = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText((logX ? "1e" : "") + x.toPrecision(3), sx(x) - 14, H - pad + 16);
    ctx.fillText((logY ? "1e" : "") + y.toPrecision(3), 2, sy(y) + 4);
  }
  ctx.fillText(xLabel, W / 2, H - 6);
  ctx.fillText(yLabel, pad + 4, pad / 2 + 12);

  series.forEach((s, k) => {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    ctx.beginPath();
    let started = false;
    for (const [xr, yr] of s.points) {
      const x = tx(xr), y = ty(yr);
      if (!isFinite(x) || !isFinite(y)) continue;
      if (started) ctx.lineTo(sx(x), sy(y));
      else ctx.moveTo(sx(x), sy(y));
      started = true;
      if (s.markers) ctx.fillRect(sx(x) - 2, sy(y) - 2, 4, 4);
    }
    ctx.stroke();
    ctx.fillText(s.label, W - pad - 150, pad / 2 + 14 + 14 * k);
  });
}

function guarded(msgId, fn) {
  return () => {
    $(msgId).textContent = "";
    try {
      fn();
    } catch (e) {
      $(msgId).textContent = String(e.message ?? e);
    }
  };
}

function runConvergence() {
  const data = rows(convergence($("c-kind").value, num("c-n"), num("c-lambda"), num("c-kmin"), num("c-kmax")), 4);
  plot($("c-plot"), [{ label: "value - reference", color: "#1f5fbf", markers: true, points: data.map((r) => [r[0], r[3]]) }], {
    logX: true, logY: true, xLabel: "h", yLabel: "error",
  });
  const t = $("c-table");
  t.innerHTML = "<tr><th>h</th><th>value</th><th>reference</th><th>error</th></tr>";
  for (const r of data) {
    t.insertAdjacentHTML("beforeend", `<tr>${r.map((v) => `<td>${v.toPrecision(10)}</td>`).join("")}</tr>`);
  }
}

function runEigenfunction() {
  const data = rows(eigenfunction(num("e-n"), num("e-lambda"), num("e-cells")), 3);
  plot($("e-plot"), [
    { label: "exact", color: "#999", points: data.map((r) => [r[0], r[2]]) },
    { label: "P1 eigenvector", color: "#c0392b", markers: true, points: data.map((r) => [r[0], r[1]]) },
  ], { xLabel: "r", yLabel: "scaled value" });
}

function runProfile() {
  const data = rows(profile(num("p-eps"), num("p-mu"), num("p-alpha"), num("p-n"), 600), 3);
  plot($("p-plot"), [
    { label: "u_eps", color: "#1f5fbf", points: data.map((r) => [r[0], r[1]]) },
    { label: "r u_eps'", color: "#27ae60", points: data.map((r) => [r[0], r[2]]) },
  ], { logX: true, xLabel: "r", yLabel: "" });
}

await init();
$("c-run").onclick = guarded("c-msg", runConvergence);
$("e-run").onclick = guarded("e-msg", runEigenfunction);
$("p-run").onclick = guarded("p-msg", runProfile);
guarded("c-msg", runConvergence)();
guarded("e-msg", runEigenfunction)();
guarded("p-msg", runProfile)();
