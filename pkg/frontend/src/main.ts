import { KeyboardApp } from "./app.js";
import { ProtocolClient } from "./protocol.js";

function mount(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el;
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const service = params.get("service") ?? "http://127.0.0.1:8900";
  const app = new KeyboardApp(new ProtocolClient(service), {
    board: mount("board"),
    strip: mount("strip"),
    row: mount("row"),
    buffer: mount("buffer"),
    status: mount("status"),
  });
  await app.start(params.get("layout") ?? undefined);
  document.addEventListener("keydown", (ev) => {
    if (ev.key === "Backspace") {
      ev.preventDefault();
      app.backspace();
    }
  });
}

boot().catch((err) => {
  const status = document.getElementById("status");
  if (status !== null) {
    status.textContent = `failed to start: ${err instanceof Error ? err.message : err}`;
    status.classList.add("error");
  }
});
