package clean

// Add mentions uintptr and unsafe.Pointer only in this comment.
func Add(a, b int) int {
	label := "unsafe.Sizeof(uintptr)"
	_ = label
	return a + b
}
