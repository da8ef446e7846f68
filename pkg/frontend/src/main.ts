import { LayoutEditor } from './editor.js';

const mount = document.getElementById('app');
if (mount === null) {
  throw new Error('missing #app mount point');
}
new LayoutEditor(mount);
