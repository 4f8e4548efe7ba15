import init, { distribution, trajectory, curve } from "./pkg/qchain_web.js";

const $ = (id) => document.getElementById(id);

// Axes plus whatever `draw` puts on them; `draw` receives data->pixel maps.
function plot(canvas, xs, ys, draw) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  ctx.clearRect(0, 0, w, h);
  const finite = ys.filter(Number.isFinite);
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(0, ...finite), Math.max(0, ...finite)];
  if (x0 === x1) { x0 -= 1; x1 += 1; }
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(pad, py(0)); ctx.lineTo(w - pad, py(0));
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.font = "11px system-ui";
  ctx.fillText(y1.toPrecision(3), 2, pad);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 16);
  ctx.fillText(x1.toPrecision(3), w - pad - 30, h - pad + 16);
  draw(ctx, px, py);
}

function guard(errorBox, fn) {
  try {
    errorBox.textContent = "";
    fn();
  } catch (e) {
    errorBox.textContent = String(e.message ?? e);
  }
}

// Exact scalars arrive as "A", "B*sqrt(D)", "-B*sqrt(D)" or "A +/- B*sqrt(D)".
function approx(v) {
  if (typeof v === "number") return v;
  const num = (s) => s.split("/").map(Number).reduce((p, q) => p / q);
  const m = v.match(/^(?:(\S+) ([+-]) )?(-?[^*]+)\*sqrt\(([^)]+)\)$/);
  if (!m) return num(v);
  const a = m[1] ? num(m[1]) : 0;
  const b = num(m[3]) * (m[2] === "-" ? -1 : 1);
  return a + b * Math.sqrt(num(m[4]));
}

function renderKernel() {
  guard($("k-error"), () => {
    const dist = JSON.parse(distribution(
      Number($("k-m").value), $("k-y").value, $("k-q").value, $("k-exact").checked));
    const values = dist.atoms.map((a) => approx(a.value));
    const masses = dist.atoms.map((a) => approx(a.mass));
    plot($("k-canvas"), values, masses, (ctx, px, py) => {
      ctx.strokeStyle = "#2b6cb0";
      ctx.lineWidth = 4;
      values.forEach((x, i) => {
        ctx.beginPath();
        ctx.moveTo(px(x), py(0));
        ctx.lineTo(px(x), py(masses[i]));
        ctx.stroke();
      });
    });
    const rows = dist.atoms.map((a) =>
      `<tr><td>${a.k}</td><td>${a.value}</td><td>${a.mass}</td></tr>`).join("");
    $("k-table").innerHTML = `<tr><th>k</th><th>&chi;_k(y)</th><th>mass</th></tr>${rows}`;
  });
}

function renderWalk() {
  guard($("t-error"), () => {
    const states = Array.from(trajectory(
      Number($("t-m").value), Number($("t-y").value), Number($("t-q").value),
      Number($("t-steps").value), Number($("t-seed").value)));
    const steps = states.map((_, i) => i);
    plot($("t-canvas"), steps, states, (ctx, px, py) => {
      ctx.strokeStyle = "#c05621";
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      states.forEach((s, i) => (i ? ctx.lineTo(px(i), py(s)) : ctx.moveTo(px(i), py(s))));
      ctx.stroke();
      ctx.fillStyle = "#c05621";
      states.forEach((s, i) => ctx.fillRect(px(i) - 2, py(s) - 2, 4, 4));
    });
  });
}

function renderCurve() {
  guard($("c-error"), () => {
    const lo = Number($("c-lo").value);
    const hi = Number($("c-hi").value);
    const samples = 400;
    const ys = Array.from(curve(
      $("c-family").value, Number($("c-n").value), Number($("c-q").value),
      Number($("c-y").value), Number($("c-rho").value), lo, hi, samples));
    const xs = ys.map((_, i) => lo + ((hi - lo) * i) / (samples - 1));
    plot($("c-canvas"), xs, ys, (ctx, px, py) => {
      ctx.strokeStyle = "#2f855a";
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(ys[i])) : ctx.moveTo(px(x), py(ys[i]))));
      ctx.stroke();
    });
  });
}

await init();
for (const [section, render] of [["kernel", renderKernel], ["walk", renderWalk], ["curves", renderCurve]]) {
  $(section).addEventListener("input", render);
  render();
}
