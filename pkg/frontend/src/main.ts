import { ApiClient, ApiError } from "./api.js";
import { AnnotateFlow } from "./annotate.js";
import { renderAnnotate, renderFlagDashboard } from "./ui.js";

function promptForToken(root: HTMLElement, message: string): void {
  root.replaceChildren();
  const form = document.createElement("form");
  const info = document.createElement("p");
  info.textContent = message;
  const input = document.createElement("input");
  input.type = "password";
  input.placeholder = "access token";
  const go = document.createElement("button");
  go.textContent = "Sign in";
  form.append(info, input, go);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    sessionStorage.setItem("annolab-token", input.value);
    void start(root);
  });
  root.replaceChildren(form);
}

async function start(root: HTMLElement): Promise<void> {
  const token = sessionStorage.getItem("annolab-token") ?? "";
  if (!token) {
    promptForToken(root, "Enter your access token.");
    return;
  }
  const api = new ApiClient("", token);
  const flow = new AnnotateFlow(api);
  try {
    await flow.load();
  } catch (error) {
    if (error instanceof ApiError && error.status === 401) {
      sessionStorage.removeItem("annolab-token");
      promptForToken(root, "Token rejected — try again.");
      return;
    }
    throw error;
  }
  const annotateRoot = document.createElement("section");
  const flagsRoot = document.createElement("section");
  root.replaceChildren(annotateRoot, flagsRoot);
  renderAnnotate(annotateRoot, flow);
  try {
    const rows = await api.flags(0.1);
    renderFlagDashboard(flagsRoot, api, rows, 0.1);
  } catch (error) {
    if (!(error instanceof ApiError && error.status === 403)) throw error;
    // annotator tokens cannot read flags; leave the dashboard hidden
  }
}

const root = document.getElementById("app");
if (root) void start(root);
